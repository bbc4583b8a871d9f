"""Seeded random generation: counter-based deterministic streams, samplers
for the model sum, Monte Carlo expectations with error bars, and the
density-splitting sampler backed by a Doeblin lower-bound certificate.

Determinism contract: every stochastic routine takes a 64-bit seed and
derives independent Philox streams keyed by (seed, stream_id).  Monte Carlo
loops draw in fixed-size blocks, one stream per block, and combine block
results in block order with compensated summation, so estimates are
bit-identical for a fixed seed regardless of the worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import CertificateError, NumericalGuardError
from .moments import ComponentDistribution, ModelSpec, has_density, pdf, sample_component

DEFAULT_BLOCK = 1 << 14


@dataclass(frozen=True)
class RngStream:
    """Counter-based stream: identical (seed, stream_id) reproduce the same
    sequence; distinct stream ids are statistically independent."""

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        key = np.array([self.seed % (1 << 64), self.stream_id % (1 << 64)], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))


def taper_exponent(radius: float, t) -> np.ndarray:
    """Exponent of the smooth taper on (radius, 2*radius):
    1 - 1/(1 - (t/radius - 1)^2); tends to 0 at t = radius and to
    -infinity at t = 2*radius."""
    t = np.abs(np.asarray(t, dtype=float))
    u = t / radius - 1.0
    denom = 1.0 - u * u
    with np.errstate(divide="ignore"):
        return 1.0 - 1.0 / denom


def smoothed_ball_indicator(radius: float, t) -> np.ndarray:
    """1 on |t| <= radius, exp(taper) on radius < |t| <= 2*radius, 0 beyond;
    continuous, values in [0, 1]."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    t = np.abs(np.asarray(t, dtype=float))
    out = np.zeros(t.shape)
    out[t <= radius] = 1.0
    mid = (t > radius) & (t < 2.0 * radius)
    if np.any(mid):
        out[mid] = np.exp(taper_exponent(radius, t[mid]))
    return out


def bump_mass(radius: float, dim: int = 1, rtol: float = 1e-8, max_doublings: int = 24) -> float:
    """Integral over R^dim of the smoothed ball indicator of |y|^2.

    The integrand is radial with support radius sqrt(2*radius), so the
    integral reduces to one dimension; the trapezoid rule is refined by
    doubling until the relative change drops below ``rtol``.
    """
    if dim not in (1, 2, 3):
        raise ValueError("dimension must be 1, 2, or 3")
    surface = {1: 2.0, 2: 2.0 * math.pi, 3: 4.0 * math.pi}[dim]
    upper = math.sqrt(2.0 * radius)

    def integral(npts: int) -> float:
        rho = np.linspace(0.0, upper, npts)
        vals = smoothed_ball_indicator(radius, rho * rho) * rho ** (dim - 1)
        return surface * float(np.trapezoid(vals, rho))

    npts = 257
    prev = integral(npts)
    for _ in range(max_doublings):
        npts = 2 * npts - 1
        cur = integral(npts)
        if abs(cur - prev) <= rtol * abs(cur):
            return cur
        prev = cur
    raise NumericalGuardError("bump mass quadrature did not converge")


@dataclass(frozen=True)
class DoeblinCert:
    """Certificate that a density dominates epsilon times the smoothed ball
    bump centered at ``center`` with squared-radius parameter ``radius``."""

    center: float
    radius: float
    epsilon: float
    mass: float = field(init=False)

    def __post_init__(self):
        if self.radius <= 0 or self.epsilon <= 0:
            raise CertificateError("radius and epsilon must be positive")
        object.__setattr__(self, "mass", bump_mass(self.radius, dim=1))
        p1 = self.epsilon * self.mass
        if not 0.0 < p1 < 1.0:
            raise CertificateError(f"epsilon * mass = {p1:.4f} is not a probability in (0,1)")

    @property
    def split_probability(self) -> float:
        return self.epsilon * self.mass

    @property
    def support_radius(self) -> float:
        return math.sqrt(2.0 * self.radius)


def doeblin_check(dist: ComponentDistribution, center: float, radius: float, epsilon: float,
                  grid_points: int = 256) -> tuple[bool, float]:
    """Grid check of the local lower bound: the density must exceed epsilon
    on the ball around ``center`` whose radius covers both the 2*radius
    ball of the lower-bound condition and the support of the smoothed bump.

    Returns (ok, margin) where margin = min(p) - epsilon on the grid; a
    sufficient condition at grid scale only.
    """
    if not has_density(dist):
        raise TypeError(f"{dist.kind} has no density; the lower-bound condition needs one")
    if grid_points < 64:
        raise ValueError("need at least 64 grid points per axis")
    reach = max(2.0 * radius, math.sqrt(2.0 * radius))
    x = np.linspace(center - reach, center + reach, grid_points)
    margin = float(np.min(pdf(dist, x)) - epsilon)
    return margin >= 0.0, margin


def nummelin_sample(dist: ComponentDistribution, cert: DoeblinCert, rng: np.random.Generator,
                    size: int = 1, min_acceptance: float = 1e-3, with_indicator: bool = False):
    """Draws from ``dist`` through the density splitting: with probability
    epsilon * mass a draw V from the normalized smoothed bump, otherwise a
    draw U from the normalized remainder (density - epsilon * bump).

    Both branches use rejection sampling; acceptance rates below
    ``min_acceptance`` or a negative remainder density abort with a
    certificate error.  With ``with_indicator`` the Bernoulli split
    variable is returned alongside the draws.
    """
    if not has_density(dist):
        raise TypeError(f"{dist.kind} is discrete; splitting needs a Lebesgue lower bound")
    p1 = cert.split_probability
    chi = rng.random(size) < p1
    out = np.empty(size)

    n_smooth = int(chi.sum())
    if n_smooth:
        out[chi] = _sample_bump(cert, rng, n_smooth, min_acceptance)
    n_rem = size - n_smooth
    if n_rem:
        out[~chi] = _sample_remainder(dist, cert, rng, n_rem, min_acceptance)
    if with_indicator:
        return out, chi
    return out


def _sample_bump(cert: DoeblinCert, rng, count, min_acceptance):
    # target density: bump(|x-center|^2)/mass on [center - R, center + R]
    R = cert.support_radius
    out = np.empty(count)
    done = 0
    proposed = accepted = 0
    while done < count:
        m = max(2 * (count - done), 64)
        x = rng.uniform(cert.center - R, cert.center + R, m)
        u = rng.random(m)
        keep = u <= smoothed_ball_indicator(cert.radius, (x - cert.center) ** 2)
        proposed += m
        accepted += int(keep.sum())
        take = min(int(keep.sum()), count - done)
        out[done : done + take] = x[keep][:take]
        done += take
        if proposed >= 1024 and accepted < min_acceptance * proposed:
            raise CertificateError(
                f"bump rejection acceptance {accepted/proposed:.2e} below {min_acceptance:.0e}"
            )
    return out


def _sample_remainder(dist, cert, rng, count, min_acceptance):
    # target density: (p - eps * bump)/(1 - eps * mass); proposal p itself,
    # acceptance ratio 1 - eps * bump / p
    out = np.empty(count)
    done = 0
    proposed = accepted = 0
    while done < count:
        m = max(2 * (count - done), 64)
        x = sample_component(dist, rng, m)
        px = pdf(dist, x)
        bump = cert.epsilon * smoothed_ball_indicator(cert.radius, (x - cert.center) ** 2)
        ratio = 1.0 - np.divide(bump, px, out=np.zeros_like(px), where=px > 0)
        if np.any(ratio < -1e-12):
            raise CertificateError(
                "remainder density negative: certificate epsilon too large for this law"
            )
        keep = rng.random(m) <= np.clip(ratio, 0.0, 1.0)
        proposed += m
        accepted += int(keep.sum())
        take = min(int(keep.sum()), count - done)
        out[done : done + take] = x[keep][:take]
        done += take
        if proposed >= 1024 and accepted < min_acceptance * proposed:
            raise CertificateError(
                f"remainder rejection acceptance {accepted/proposed:.2e} below {min_acceptance:.0e}"
            )
    return out


def sample_sum(model: ModelSpec, rng: np.random.Generator, size: int = 1) -> np.ndarray:
    """Draws of the scaled sum n^{-1/2} sum_k C_k Y_k; shape (size, d)."""
    out = np.zeros((size, model.d))
    scale = 1.0 / math.sqrt(model.n)
    for k in range(model.n):
        rec = model.summand(k)
        m = len(rec.components)
        y = np.empty((size, m))
        for j, comp in enumerate(rec.components):
            y[:, j] = sample_component(comp, rng, size)
        out += y @ rec.C.T
    return out * scale


def _mc_blocks(samples: int, block: int) -> list[tuple[int, int]]:
    sizes = []
    start = 0
    while start < samples:
        sizes.append((len(sizes), min(block, samples - start)))
        start += block
    return sizes


def mc_expectation(f, model: ModelSpec, samples: int, seed: int, workers: int = 1,
                   block: int = DEFAULT_BLOCK) -> tuple[float, float]:
    """Monte Carlo estimate of E[f(S_n)] with its standard error.

    ``f`` maps an (m, d) array to m values.  Sampling runs in fixed blocks,
    one Philox stream per block, so the estimate depends only on
    (seed, samples, block) and not on the worker count; workers only add
    thread parallelism.
    """
    if samples < 100:
        raise ValueError("need at least 100 samples")
    plan = _mc_blocks(samples, block)

    def run_block(args):
        bid, bsize = args
        rng = RngStream(seed, bid).generator()
        vals = np.asarray(f(sample_sum(model, rng, bsize)), dtype=float)
        return float(vals.sum()), float((vals * vals).sum())

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_block, plan))
    else:
        results = [run_block(p) for p in plan]

    total = math.fsum(r[0] for r in results)
    total_sq = math.fsum(r[1] for r in results)
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0)
    se = math.sqrt(var / samples)
    return mean, se
