import numpy as np
import pytest

from edgeworth.errors import KernelMomentError
from edgeworth.kernels import build_super_kernel, frequency_window, mollify, smooth_step


@pytest.fixture(scope="module")
def kernel():
    return build_super_kernel()


def test_window_shape():
    assert smooth_step(np.array([-1.0, 0.0]))[1] == 0.0
    assert smooth_step(np.array([1.0, 2.0]))[0] == 1.0
    xi = np.array([0.0, 5.0, 10.0, 20.0, 30.0, 35.0])
    w = frequency_window(xi, 10.0, 20.0)
    assert w[0] == w[1] == w[2] == 1.0
    assert 0.0 < w[3] < 1.0
    assert w[4] == 0.0 and w[5] == 0.0


def test_mass_and_moments(kernel):
    assert abs(kernel.mass() - 1.0) <= 1e-8
    for k in range(1, 7):
        assert abs(kernel.moment(k)) <= 1e-6
    # odd moments vanish exactly on the antisymmetric grid
    assert kernel.moment(1) == 0.0
    np.testing.assert_allclose(kernel.values, kernel.values[::-1], atol=1e-15)


def test_kernel_takes_negative_values(kernel):
    assert kernel.values.min() < 0.0
    assert kernel.abs_norm() > 1.0


def test_weighted_derivative_norms_finite(kernel):
    for m in range(5):
        v = kernel.weighted_derivative_norm(m, 1)
        assert np.isfinite(v) and v > 0


def test_polynomial_reproduction(kernel):
    def f(y):
        return 1.5 * y**4 - 2.0 * y**3 + y - 7.0

    xs = np.linspace(-2.0, 2.0, 9)
    for delta in (1.0, 0.5, 0.1):
        err = np.max(np.abs(mollify(f, kernel, delta, xs) - f(xs)))
        assert err <= 1e-6


def test_constant_reproduced(kernel):
    out = mollify(lambda y: np.ones_like(y), kernel, 0.7, np.array([0.0, 1.3]))
    np.testing.assert_allclose(out, 1.0, atol=1e-8)


def test_step_pointwise_convergence(kernel):
    step = lambda y: (y > 0).astype(float)
    errs = []
    for delta in (0.2, 0.05):
        v = mollify(step, kernel, delta, np.array([-0.5, 0.5]))
        errs.append(max(abs(v[0]), abs(1.0 - v[1])))
    assert errs[0] < 1e-3 and errs[1] < 1e-3
    assert errs[1] < errs[0]


def test_moment_failure_reports_order():
    with pytest.raises(KernelMomentError) as exc:
        build_super_kernel(plateau=2.0, rolloff=4.0, half_width=22.0, points=1 << 12)
    assert exc.value.order in range(1, 7)


def test_parameter_validation():
    with pytest.raises(ValueError):
        build_super_kernel(points=1000)
    with pytest.raises(ValueError):
        build_super_kernel(points=(1 << 12) + 1)
    with pytest.raises(ValueError):
        mollify(lambda y: y, build_super_kernel(), 1.5, np.array([0.0]))


def test_csv_export(tmp_path, kernel):
    path = tmp_path / "kernel.csv"
    kernel.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "x,value"
    assert len(lines) == len(kernel.x) + 1
