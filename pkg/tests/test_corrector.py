import json

import numpy as np
import pytest

from edgeworth.corrector import (
    CorrectorPolynomial,
    DiffOp,
    corrector_index_tuples,
    corrector_operator,
    corrector_operator_enumerated,
    corrector_polynomial,
    edgeworth_expectation,
    explicit_order3,
    hermitize,
    normalize,
    order2_discrepancy_terms,
    order_discrepancy,
)
from edgeworth.errors import NumericalGuardError
from edgeworth.hermite import Polynomial, hermite1d
from edgeworth.moments import (
    ModelSpec,
    Summand,
    exact_sum_moment,
    gaussian_mixture,
    iid_model,
    rademacher,
    skewed_two_point,
    standard_normal,
    uniform_centered,
)


def random_model(rng, d, n, normalized=True):
    kinds = [rademacher(), uniform_centered(), skewed_two_point(0.25),
             gaussian_mixture(0.5, 0.6, 0.8, -0.6, 0.8), standard_normal()]
    summands = tuple(
        Summand(
            rng.normal(size=(d, d)) + np.eye(d),
            tuple(kinds[int(rng.integers(len(kinds)))] for _ in range(d)),
        )
        for _ in range(n)
    )
    model = ModelSpec(d=d, n=n, summands=summands)
    return normalize(model) if normalized else model


def test_index_tuples_examples():
    assert corrector_index_tuples(1, 1, 3) == [((3, 0),)]
    assert corrector_index_tuples(1, 3, 3) == [((3, 1),), ((5, 0),)]
    assert corrector_index_tuples(2, 3, 3) == [((3, 0), (4, 0)), ((4, 0), (3, 0))]
    assert corrector_index_tuples(2, 2, 3) == [((3, 0), (3, 0))]
    for lam in corrector_index_tuples(2, 4, 4):
        assert sum(l for l, _ in lam) + 2 * sum(lp for _, lp in lam) == 4 + 2 * 2


def test_diffop_algebra():
    a = DiffOp(1, {(2,): 1.5})
    b = DiffOp(1, {(1,): 2.0, (0,): 1.0})
    c = a.compose(b)
    assert c.terms == {(3,): 3.0, (2,): 1.5}
    assert a.compose(b).terms == b.compose(a).terms
    f = Polynomial(1, {(4,): 1.0})
    assert a.apply(f).terms == {(2,): 18.0}


def test_gamma_zero_for_gaussian_model():
    model = iid_model(standard_normal(), 25)
    for k in (1, 2, 3):
        assert corrector_operator(model, k, 3).is_zero()


def test_gamma_uniform_examples():
    model = iid_model(uniform_centered(), 100)
    assert corrector_operator(model, 1, 2).is_zero()
    g2 = corrector_operator(model, 2, 2)
    assert set(g2.terms) == {(4,)}
    assert g2.terms[(4,)] == pytest.approx(-1.0 / 20.0, abs=1e-15)


def test_gamma_dp_matches_enumeration():
    rng = np.random.default_rng(0)
    model = random_model(rng, 2, 6, normalized=False)
    for k in (1, 2, 3):
        a = corrector_operator(model, k, 3)
        b = corrector_operator_enumerated(model, k, 3)
        keys = set(a.terms) | set(b.terms)
        assert max(abs(a.terms.get(t, 0.0) - b.terms.get(t, 0.0)) for t in keys) < 1e-12
    iid = iid_model(skewed_two_point(0.3), 8)
    for k in (1, 2, 3):
        a = corrector_operator(iid, k, 3)
        b = corrector_operator_enumerated(iid, k, 3)
        keys = set(a.terms) | set(b.terms)
        assert max(abs(a.terms.get(t, 0.0) - b.terms.get(t, 0.0)) for t in keys) < 1e-12


def test_odd_orders_vanish_for_symmetric_components():
    model = iid_model(uniform_centered(), 50)
    for k in (1, 3):
        assert corrector_operator(model, k, 4).is_zero()


def test_corrector_polynomial_basics():
    assert corrector_polynomial(iid_model(uniform_centered(), 10), 0).terms == {}
    assert corrector_polynomial(iid_model(standard_normal(), 10), 3).terms == {}
    phi = corrector_polynomial(iid_model(uniform_centered(), 100), 2)
    assert phi.constant == 1.0
    assert phi.terms == pytest.approx({(4,): -5e-4})
    # mean one: Hermite terms integrate to zero
    assert edgeworth_expectation(Polynomial(1, {(0,): 1.0}), (0,), phi) == pytest.approx(1.0)


def test_corrector_mean_one_random_model():
    rng = np.random.default_rng(21)
    model = random_model(rng, 2, 12)
    phi = corrector_polynomial(model, 3)
    one = Polynomial(2, {(0, 0): 1.0})
    assert edgeworth_expectation(one, (0, 0), phi) == pytest.approx(1.0, abs=1e-12)


def test_hermitize_duality():
    # E[(Gamma f)(W)] = E[f(W) H_Gamma(W)] for a sample operator
    rng = np.random.default_rng(2)
    model = random_model(rng, 2, 5, normalized=False)
    op = corrector_operator(model, 2, 3)
    f = Polynomial(2, {(2, 1): 1.0, (0, 4): -0.5, (1, 0): 2.0, (2, 2): 0.25})
    lhs = op.apply(f).gaussian_expectation()
    dual = CorrectorPolynomial(d=2, constant=0.0, terms=hermitize(op))
    rhs = edgeworth_expectation(f, (0, 0), dual)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)
    # spec example: a * d^4 -> a * H_4, E[d^4 x^4] = 24 = E[x^4 H_4]
    quart = DiffOp(1, {(4,): 1.0})
    assert quart.apply(Polynomial(1, {(4,): 1.0})).gaussian_expectation() == 24.0


def test_order1_identity_and_order2_discrepancy():
    rng = np.random.default_rng(5)
    model = random_model(rng, 2, 10)
    x = rng.normal(size=(25, 2))
    assert np.max(np.abs(order_discrepancy(model, 1, x))) < 1e-12

    tp = skewed_two_point(0.2)
    x1 = np.array([0.7])
    vals = {n: float(n * order_discrepancy(iid_model(tp, n), 2, x1)) for n in (50, 100, 200)}
    spread = max(abs(a - b) for a in vals.values() for b in vals.values())
    assert spread < 1e-10
    closed = CorrectorPolynomial(
        d=1, constant=0.0, terms=order2_discrepancy_terms(iid_model(tp, 100))
    )
    assert 100 * closed.evaluate(x1) == pytest.approx(vals[100], abs=1e-10)
    # symmetric model: no third-order gaps, so no order-2 discrepancy
    assert order2_discrepancy_terms(iid_model(uniform_centered(), 40)) == {}
    assert order_discrepancy(iid_model(uniform_centered(), 40), 2, x1) == pytest.approx(0.0, abs=1e-15)


def test_explicit_order3_symmetric_first_corrector_vanishes():
    model = iid_model(uniform_centered(), 30)
    h1, h2, h3 = explicit_order3(model)
    assert h1.terms == {}
    assert h2.terms == pytest.approx({(4,): -1.0 / 20.0})
    model_r = iid_model(rademacher(), 30)
    assert explicit_order3(model_r)[1].terms == pytest.approx({(4,): -1.0 / 12.0})


def test_edgeworth_expectation_matches_exact_moments():
    model = iid_model(uniform_centered(), 100)
    phi = corrector_polynomial(model, 2)
    f = Polynomial(1, {(4,): 1.0})
    val = edgeworth_expectation(f, (0,), phi)
    assert val == pytest.approx(3.0 - 1.2 / 100.0, abs=1e-13)
    assert val == pytest.approx(exact_sum_moment(model, (4,)), abs=1e-13)
    h4 = Polynomial.from_univariate(hermite1d(4))
    assert edgeworth_expectation(h4, (0,), phi) == pytest.approx(-0.012, abs=1e-14)


def test_exact_vs_quadrature_backends():
    rng = np.random.default_rng(9)
    model = random_model(rng, 2, 8)
    phi = corrector_polynomial(model, 2)
    from edgeworth.hermite import random_polynomial

    for _ in range(3):
        f = random_polynomial(rng, 2, degree=6)
        exact = edgeworth_expectation(f, (0, 0), phi, backend="exact")
        quad = edgeworth_expectation(f, (0, 0), phi, backend="quadrature", nodes=40)
        assert quad == pytest.approx(exact, abs=1e-8 * max(1.0, abs(exact)))
    # plain callable against the trivial corrector: plain Gaussian expectation
    trivial = CorrectorPolynomial(d=1, constant=1.0, terms={})
    val = edgeworth_expectation(lambda x: np.cos(x[:, 0]), (0,), trivial, backend="quadrature")
    assert val == pytest.approx(np.exp(-0.5), abs=1e-10)
    with pytest.raises(TypeError):
        edgeworth_expectation(lambda x: x[:, 0], (1, 0), phi, backend="quadrature")


def test_quadrature_guard_trips_for_rough_function():
    phi = CorrectorPolynomial(d=1, constant=1.0, terms={})

    def rough(x):
        return np.abs(x[:, 0])  # kink: node doubling keeps moving the value

    with pytest.raises(NumericalGuardError):
        edgeworth_expectation(rough, (0,), phi, backend="quadrature", nodes=8, tol=1e-10)


def test_derivative_index_exact_mode():
    # E[d_gamma f(W) Phi] equals the expectation of the differentiated polynomial
    model = iid_model(skewed_two_point(0.2), 64)
    phi = corrector_polynomial(model, 1)
    f = Polynomial(1, {(4,): 1.0})
    lhs = edgeworth_expectation(f, (2,), phi)
    rhs = edgeworth_expectation(f.diff((2,)), (0,), phi)
    assert lhs == pytest.approx(rhs, rel=1e-14)


def test_normalize():
    model = iid_model(uniform_centered(), 10)
    scaled = ModelSpec(
        d=1, n=10,
        summands=(Summand(2.0 * np.eye(1), (uniform_centered(),)),),
        iid=True,
    )
    normed = normalize(scaled)
    assert normed.summands[0].C[0, 0] == pytest.approx(1.0)
    again = normalize(normed)
    assert again.summands[0].C[0, 0] == pytest.approx(1.0)
    assert normalize(model).summands[0].C[0, 0] == pytest.approx(1.0)
    rng = np.random.default_rng(31)
    rand = random_model(rng, 2, 7, normalized=False)
    assert normalize(rand).is_normalized(1e-10)
    degenerate = ModelSpec(
        d=2, n=2,
        summands=(
            Summand(np.array([[1.0, 0.0], [0.0, 0.0]]), (rademacher(), rademacher())),
            Summand(np.array([[1.0, 0.0], [0.0, 0.0]]), (rademacher(), rademacher())),
        ),
    )
    with pytest.raises(NumericalGuardError):
        normalize(degenerate)


def test_corrector_json_roundtrip():
    phi = corrector_polynomial(iid_model(skewed_two_point(0.2), 50), 3)
    doc = json.loads(phi.to_json_str())
    back = CorrectorPolynomial.from_json(doc)
    assert back.d == phi.d and back.constant == phi.constant
    assert back.terms == phi.terms
    x = np.linspace(-2, 2, 7).reshape(-1, 1)
    np.testing.assert_array_equal(back.evaluate(x), phi.evaluate(x))


def test_gamma_requires_valid_order():
    model = iid_model(rademacher(), 5)
    with pytest.raises(ValueError):
        corrector_operator(model, 4, 3)
    with pytest.raises(ValueError):
        corrector_index_tuples(2, 1, 3)
