"""Probabilists' Hermite polynomials, exact standard-normal moments, and
polynomial algebra used by the corrector machinery.

Everything here is exact in double precision for the orders the library
supports (degree <= 12): coefficients and Gaussian moments are integers,
so sums of products round only at the final accumulation.
"""

from __future__ import annotations

import math

import numpy as np

from .multiindex import check_multiindex, enumerate_multiindices

MAX_DEGREE = 12

_HERMITE_CACHE: list[np.ndarray] = [np.array([1.0]), np.array([0.0, 1.0])]


def hermite1d(m: int) -> np.ndarray:
    """Coefficient vector of the probabilists' Hermite polynomial of order m.

    Position k holds the coefficient of ``x**k``.  Generated by the
    recurrence ``H_{m+1}(x) = x H_m(x) - m H_{m-1}(x)`` with H_0 = 1, H_1 = x;
    coefficients are exact integers up to the supported degree.
    """
    if m < 0:
        raise ValueError("order must be >= 0")
    if m > MAX_DEGREE:
        raise ValueError(f"polynomial arithmetic capped at degree {MAX_DEGREE}")
    while len(_HERMITE_CACHE) <= m:
        k = len(_HERMITE_CACHE) - 1
        hk, hk1 = _HERMITE_CACHE[k], _HERMITE_CACHE[k - 1]
        nxt = np.zeros(k + 2)
        nxt[1:] += hk
        nxt[: k] -= k * hk1
        _HERMITE_CACHE.append(nxt)
    return _HERMITE_CACHE[m].copy()


def hermite_value_table(max_order: int, x: np.ndarray) -> np.ndarray:
    """Table ``T[k, ...] = H_k(x)`` for k = 0..max_order, by the recurrence."""
    x = np.asarray(x, dtype=float)
    table = np.empty((max_order + 1,) + x.shape)
    table[0] = 1.0
    if max_order >= 1:
        table[1] = x
    for k in range(1, max_order):
        table[k + 1] = x * table[k] - k * table[k - 1]
    return table


def hermite_eval(beta, x) -> np.ndarray | float:
    """H_beta(x) = prod_i H_{beta_i}(x_i) for points in R^d.

    ``x`` may be a single point of shape (d,) or an array of shape
    (npts, d); the product runs over all coordinates (entries with
    beta_i = 0 contribute the factor H_0 = 1).
    """
    beta = check_multiindex(beta)
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    pts = x[None, :] if single else x
    if pts.shape[1] != len(beta):
        raise ValueError(f"point dimension {pts.shape[1]} != index dimension {len(beta)}")
    table = hermite_value_table(max(beta), pts)
    out = np.ones(pts.shape[0])
    for i, b in enumerate(beta):
        if b > 0:
            out = out * table[b, :, i]
    return float(out[0]) if single else out


def gaussian_moment_1d(k: int) -> float:
    """E[Z^k] for Z standard normal: (k-1)!! for even k, 0 for odd k."""
    if k < 0:
        raise ValueError("moment order must be >= 0")
    if k % 2 == 1:
        return 0.0
    return float(math.prod(range(k - 1, 0, -2))) if k > 0 else 1.0


def gaussian_moment(beta) -> float:
    """E[W^beta] for W standard normal in R^d with independent coordinates."""
    beta = check_multiindex(beta)
    out = 1.0
    for b in beta:
        m = gaussian_moment_1d(b)
        if m == 0.0:
            return 0.0
        out *= m
    return out


def _poly1d_product_moment(coeffs_a: np.ndarray, coeffs_b: np.ndarray, shift: int = 0) -> float:
    # E[p(Z) q(Z) Z^shift] via monomial expansion
    prod = np.convolve(coeffs_a, coeffs_b)
    return sum(c * gaussian_moment_1d(k + shift) for k, c in enumerate(prod) if c != 0.0)


def hermite_inner(beta1, beta2) -> float:
    """E[H_{beta1}(W) H_{beta2}(W)], computed by expanding the product to
    monomials and summing exact Gaussian moments.

    Equals ``prod_i beta_i!`` when the indices coincide and 0 otherwise;
    the expansion route is kept so tests can pit it against that closed form.
    """
    beta1 = check_multiindex(beta1)
    beta2 = check_multiindex(beta2)
    if len(beta1) != len(beta2):
        raise ValueError("dimension mismatch")
    out = 1.0
    for b1, b2 in zip(beta1, beta2):
        m = _poly1d_product_moment(hermite1d(b1), hermite1d(b2))
        if m == 0.0:
            return 0.0
        out *= m
    return out


def gauss_hermite(nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights integrating exactly against the standard normal
    density up to degree 2*nodes - 1 (weights normalized to sum to 1)."""
    if nodes < 1:
        raise ValueError("need at least one node")
    x, w = np.polynomial.hermite_e.hermegauss(nodes)
    return x, w / w.sum()


class Polynomial:
    """Multivariate polynomial as a map monomial multi-index -> coefficient."""

    __slots__ = ("d", "terms")

    def __init__(self, d: int, terms: dict | None = None):
        if d < 1:
            raise ValueError("dimension must be >= 1")
        self.d = d
        self.terms = {}
        for beta, c in (terms or {}).items():
            beta = check_multiindex(beta)
            if len(beta) != d:
                raise ValueError("monomial dimension mismatch")
            if c != 0.0:
                self.terms[beta] = self.terms.get(beta, 0.0) + c

    @classmethod
    def monomial(cls, beta, coeff: float = 1.0) -> "Polynomial":
        beta = check_multiindex(beta)
        return cls(len(beta), {beta: coeff})

    @classmethod
    def from_univariate(cls, coeffs, d: int = 1, var: int = 0) -> "Polynomial":
        terms = {}
        for k, c in enumerate(coeffs):
            if c != 0.0:
                beta = [0] * d
                beta[var] = k
                terms[tuple(beta)] = float(c)
        return cls(d, terms)

    def degree(self) -> int:
        return max((sum(b) for b in self.terms), default=0)

    def __add__(self, other: "Polynomial") -> "Polynomial":
        if self.d != other.d:
            raise ValueError("dimension mismatch")
        terms = dict(self.terms)
        for b, c in other.terms.items():
            terms[b] = terms.get(b, 0.0) + c
        return Polynomial(self.d, terms)

    def scale(self, a: float) -> "Polynomial":
        return Polynomial(self.d, {b: a * c for b, c in self.terms.items()})

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        if self.d != other.d:
            raise ValueError("dimension mismatch")
        terms: dict = {}
        for b1, c1 in self.terms.items():
            for b2, c2 in other.terms.items():
                b = tuple(x + y for x, y in zip(b1, b2))
                terms[b] = terms.get(b, 0.0) + c1 * c2
        return Polynomial(self.d, terms)

    def diff(self, gamma) -> "Polynomial":
        """Apply the differential operator with multiplicities ``gamma``."""
        gamma = check_multiindex(gamma)
        if len(gamma) != self.d:
            raise ValueError("dimension mismatch")
        terms: dict = {}
        for beta, c in self.terms.items():
            if any(b < g for b, g in zip(beta, gamma)):
                continue
            coeff = c
            for b, g in zip(beta, gamma):
                # falling factorial b (b-1) ... (b-g+1)
                for j in range(g):
                    coeff *= b - j
            nb = tuple(b - g for b, g in zip(beta, gamma))
            terms[nb] = terms.get(nb, 0.0) + coeff
        return Polynomial(self.d, terms)

    def __call__(self, x) -> np.ndarray | float:
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        pts = x[None, :] if single else x
        out = np.zeros(pts.shape[0])
        for beta, c in self.terms.items():
            mono = np.ones(pts.shape[0]) * c
            for i, b in enumerate(beta):
                if b:
                    mono *= pts[:, i] ** b
            out += mono
        return float(out[0]) if single else out

    def gaussian_expectation(self) -> float:
        return sum(c * gaussian_moment(b) for b, c in self.terms.items())

    def __repr__(self) -> str:  # pragma: no cover
        return f"Polynomial(d={self.d}, {len(self.terms)} terms, degree {self.degree()})"


def expect_poly_times_hermite(f: Polynomial, beta) -> float:
    """E[f(W) H_beta(W)] computed exactly through monomial moments."""
    beta = check_multiindex(beta)
    if len(beta) != f.d:
        raise ValueError("dimension mismatch")
    total = 0.0
    hcoeffs = [hermite1d(b) for b in beta]
    for mono, c in f.terms.items():
        fac = c
        for i, (m, h) in enumerate(zip(mono, hcoeffs)):
            fac_i = sum(h[k] * gaussian_moment_1d(m + k) for k in range(len(h)) if h[k] != 0.0)
            fac *= fac_i
            if fac == 0.0:
                break
        total += fac
    return total


def duality_check(beta, f: Polynomial) -> tuple[float, float]:
    """Both sides of the Gaussian integration-by-parts identity
    ``E[d_beta f(W)] = E[f(W) H_beta(W)]``, each computed exactly.

    Returns the pair; the caller asserts equality.
    """
    lhs = f.diff(beta).gaussian_expectation()
    rhs = expect_poly_times_hermite(f, beta)
    return lhs, rhs


def rodrigues_coeffs(m: int) -> np.ndarray:
    """Hermite coefficients via the Rodrigues-type derivative recursion
    (independent route, used as the oracle for :func:`hermite1d`).

    Writes d^m/dx^m e^{-x^2/2} = p_m(x) e^{-x^2/2} with
    p_{m+1} = p_m' - x p_m, then H_m = (-1)^m p_m.
    """
    p = np.array([1.0])
    for _ in range(m):
        dp = np.arange(1, len(p)) * p[1:] if len(p) > 1 else np.zeros(0)
        nxt = np.zeros(len(p) + 1)
        nxt[: len(dp)] += dp
        nxt[1:] -= p
        p = nxt
    return ((-1) ** m) * p


def random_polynomial(rng, d: int, degree: int, coeff_range: int = 3) -> Polynomial:
    """Random polynomial with integer coefficients (keeps both sides of
    duality identities exactly representable)."""
    terms = {}
    for l in range(degree + 1):
        for beta in enumerate_multiindices(d, l):
            c = int(rng.integers(-coeff_range, coeff_range + 1))
            if c:
                terms[beta] = float(c)
    return Polynomial(d, terms)
