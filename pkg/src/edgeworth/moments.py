"""Distribution catalog with exact raw moments, model specification for
scaled sums of independent non-identically distributed vectors, pushforward
moments through mixing matrices, moment gaps against the Gaussian surrogate,
and an exact dynamic-programming oracle for moments of the scaled sum.

All catalog entries are constrained to mean 0 and variance 1; correlation
between the coordinates of one summand is expressed through its mixing
matrix, never inside the component law.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .multiindex import check_multiindex, enumerate_multiindices

SQRT3 = math.sqrt(3.0)

_KINDS = ("rademacher", "uniform_centered", "two_point", "gaussian_mixture", "standard_normal")


@dataclass(frozen=True)
class ComponentDistribution:
    """One scalar component law from the closed catalog (mean 0, variance 1)."""

    kind: str
    params: tuple = ()

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown component kind {self.kind!r}")
        m1 = raw_moment(self, 1)
        m2 = raw_moment(self, 2)
        if abs(m1) > 1e-12 or abs(m2 - 1.0) > 1e-12:
            raise ValueError(f"{self.kind}{self.params}: mean {m1}, variance {m2}; need (0, 1)")

    def to_json(self) -> dict:
        out = {"kind": self.kind}
        if self.kind == "two_point":
            out.update(dict(zip(("p", "a", "b"), self.params)))
        elif self.kind == "gaussian_mixture":
            out.update(dict(zip(("w", "mu1", "sigma1", "mu2", "sigma2"), self.params)))
        return out

    @staticmethod
    def from_json(doc: dict) -> "ComponentDistribution":
        kind = doc.get("kind")
        if kind == "two_point":
            return two_point(doc["p"], doc["a"], doc["b"])
        if kind == "gaussian_mixture":
            return gaussian_mixture(doc["w"], doc["mu1"], doc["sigma1"], doc["mu2"], doc["sigma2"])
        if kind in _KINDS:
            return ComponentDistribution(kind)
        raise ValueError(f"unknown component kind {kind!r}")


def rademacher() -> ComponentDistribution:
    return ComponentDistribution("rademacher")


def uniform_centered() -> ComponentDistribution:
    """Uniform on [-sqrt(3), sqrt(3)]."""
    return ComponentDistribution("uniform_centered")


def standard_normal() -> ComponentDistribution:
    return ComponentDistribution("standard_normal")


def two_point(p: float, a: float, b: float) -> ComponentDistribution:
    """Value ``a`` with probability p, value ``-b`` with probability 1-p."""
    return ComponentDistribution("two_point", (float(p), float(a), float(b)))


def skewed_two_point(p: float) -> ComponentDistribution:
    """The unique mean-0 variance-1 two-point law with P(positive) = p;
    skewness (1-2p)/sqrt(p(1-p)) is nonzero for p != 1/2."""
    if not 0.0 < p < 1.0:
        raise ValueError("p must be in (0,1)")
    a = math.sqrt((1.0 - p) / p)
    b = math.sqrt(p / (1.0 - p))
    return two_point(p, a, b)


def gaussian_mixture(w: float, mu1: float, sigma1: float, mu2: float, sigma2: float) -> ComponentDistribution:
    return ComponentDistribution("gaussian_mixture", (float(w), float(mu1), float(sigma1), float(mu2), float(sigma2)))


def symmetric_gaussian_mixture(mu: float) -> ComponentDistribution:
    """Equal-weight mixture of N(mu, s) and N(-mu, s) with mu^2 + s^2 = 1."""
    if not 0.0 <= mu < 1.0:
        raise ValueError("need 0 <= mu < 1")
    s = math.sqrt(1.0 - mu * mu)
    return gaussian_mixture(0.5, mu, s, -mu, s)


def _normal_raw_moment(mu: float, sigma: float, k: int) -> float:
    total = 0.0
    for j in range(0, k + 1, 2):
        gm = math.prod(range(j - 1, 0, -2)) if j > 0 else 1
        total += math.comb(k, j) * (sigma ** j) * gm * (mu ** (k - j))
    return total


def raw_moment(dist: ComponentDistribution, k: int) -> float:
    """Exact E[Y^k] in closed form."""
    if k < 0:
        raise ValueError("moment order must be >= 0")
    if k == 0:
        return 1.0
    kind = dist.kind
    if kind == "rademacher":
        return 1.0 if k % 2 == 0 else 0.0
    if kind == "uniform_centered":
        # (1/(2 sqrt 3)) int_{-s3}^{s3} x^k dx = 3^{k/2}/(k+1) for even k
        return (SQRT3 ** k) / (k + 1) if k % 2 == 0 else 0.0
    if kind == "standard_normal":
        return float(math.prod(range(k - 1, 0, -2))) if k % 2 == 0 else 0.0
    if kind == "two_point":
        p, a, b = dist.params
        return p * a ** k + (1.0 - p) * (-b) ** k
    if kind == "gaussian_mixture":
        w, mu1, s1, mu2, s2 = dist.params
        return w * _normal_raw_moment(mu1, s1, k) + (1.0 - w) * _normal_raw_moment(mu2, s2, k)
    raise ValueError(f"unsupported kind {kind!r}")


def has_density(dist: ComponentDistribution) -> bool:
    return dist.kind in ("uniform_centered", "standard_normal", "gaussian_mixture")


def pdf(dist: ComponentDistribution, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    kind = dist.kind
    if kind == "uniform_centered":
        return np.where(np.abs(x) <= SQRT3, 1.0 / (2.0 * SQRT3), 0.0)
    if kind == "standard_normal":
        return np.exp(-0.5 * x * x) / math.sqrt(2 * math.pi)
    if kind == "gaussian_mixture":
        w, mu1, s1, mu2, s2 = dist.params
        g1 = np.exp(-0.5 * ((x - mu1) / s1) ** 2) / (s1 * math.sqrt(2 * math.pi))
        g2 = np.exp(-0.5 * ((x - mu2) / s2) ** 2) / (s2 * math.sqrt(2 * math.pi))
        return w * g1 + (1.0 - w) * g2
    raise TypeError(f"{kind} has no Lebesgue density")


def sample_component(dist: ComponentDistribution, rng: np.random.Generator, size) -> np.ndarray:
    kind = dist.kind
    if kind == "rademacher":
        return rng.integers(0, 2, size=size).astype(float) * 2.0 - 1.0
    if kind == "uniform_centered":
        return rng.uniform(-SQRT3, SQRT3, size=size)
    if kind == "standard_normal":
        return rng.standard_normal(size=size)
    if kind == "two_point":
        p, a, b = dist.params
        return np.where(rng.random(size=size) < p, a, -b)
    if kind == "gaussian_mixture":
        w, mu1, s1, mu2, s2 = dist.params
        pick = rng.random(size=size) < w
        z = rng.standard_normal(size=size)
        return np.where(pick, mu1 + s1 * z, mu2 + s2 * z)
    raise ValueError(f"unsupported kind {kind!r}")


def component_icdf(dist: ComponentDistribution, u) -> np.ndarray:
    """Inverse CDF for kinds with a closed form (enables common-random-number
    coupling of different laws through shared uniforms)."""
    u = np.asarray(u, dtype=float)
    kind = dist.kind
    if kind == "rademacher":
        return np.where(u < 0.5, -1.0, 1.0)
    if kind == "uniform_centered":
        return (2.0 * u - 1.0) * SQRT3
    if kind == "standard_normal":
        return ndtri(u)
    if kind == "two_point":
        p, a, b = dist.params
        return np.where(u < 1.0 - p, -b, a)
    raise TypeError(f"{kind} has no closed-form inverse CDF")


@dataclass(frozen=True, eq=False)
class Summand:
    """Mixing matrix and independent component laws of one summand."""

    C: np.ndarray
    components: tuple

    def __post_init__(self):
        C = np.atleast_2d(np.asarray(self.C, dtype=float))
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "components", tuple(self.components))
        if C.shape[1] != len(self.components):
            raise ValueError(f"matrix has {C.shape[1]} columns but {len(self.components)} components")

    def sigma(self) -> np.ndarray:
        return self.C @ self.C.T


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """Problem instance: S_n = n^{-1/2} sum_k C_k Y_k in R^d.

    ``iid=True`` means a single summand record is reused n times (the
    summands tuple then has length 1).
    """

    d: int
    n: int
    summands: tuple
    iid: bool = False

    def __post_init__(self):
        object.__setattr__(self, "summands", tuple(self.summands))
        if self.d < 1 or self.n < 1:
            raise ValueError("need d >= 1 and n >= 1")
        expected = 1 if self.iid else self.n
        if len(self.summands) != expected:
            raise ValueError(f"expected {expected} summand records, got {len(self.summands)}")
        for s in self.summands:
            if s.C.shape[0] != self.d:
                raise ValueError("summand matrix rows != model dimension")

    def summand(self, k: int) -> Summand:
        """Record of summand k (0-based)."""
        if not 0 <= k < self.n:
            raise IndexError(k)
        return self.summands[0] if self.iid else self.summands[k]

    def sigma(self, k: int) -> np.ndarray:
        return self.summand(k).sigma()

    def covariance_mean(self) -> np.ndarray:
        """(1/n) sum_k C_k C_k^T, the covariance of S_n."""
        if self.iid:
            return self.summands[0].sigma()
        return sum(s.sigma() for s in self.summands) / self.n

    def is_normalized(self, tol: float = 1e-10) -> bool:
        return bool(np.max(np.abs(self.covariance_mean() - np.eye(self.d))) <= tol)

    def unique_summands(self):
        """Pairs (record, list of 0-based indices) grouping equal records."""
        if self.iid:
            return [(self.summands[0], list(range(self.n)))]
        return [(s, [k]) for k, s in enumerate(self.summands)]

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "n": self.n,
            "iid": self.iid,
            "summands": [
                {"C": s.C.tolist(), "components": [c.to_json() for c in s.components]}
                for s in self.summands
            ],
        }

    @staticmethod
    def from_json(doc: dict) -> "ModelSpec":
        summands = tuple(
            Summand(
                np.asarray(rec["C"], dtype=float),
                tuple(ComponentDistribution.from_json(c) for c in rec["components"]),
            )
            for rec in doc["summands"]
        )
        return ModelSpec(d=int(doc["d"]), n=int(doc["n"]), summands=summands, iid=bool(doc.get("iid", False)))


def model_from_json_str(text: str) -> ModelSpec:
    return ModelSpec.from_json(json.loads(text))


def iid_model(dist: ComponentDistribution, n: int) -> ModelSpec:
    """One-dimensional iid model with unit mixing matrix."""
    return ModelSpec(d=1, n=n, summands=(Summand(np.eye(1), (dist,)),), iid=True)


def iid_vector_model(dists, n: int) -> ModelSpec:
    """iid model in d = len(dists) dimensions with identity mixing."""
    dists = tuple(dists)
    return ModelSpec(d=len(dists), n=n, summands=(Summand(np.eye(len(dists)), dists),), iid=True)


def pushforward_moment(C: np.ndarray, comps, beta) -> float:
    """E[(C Y)^beta] for independent components with exact raw moments.

    Multilinear expansion: each output coordinate's multiplicity splits
    over the input coordinates; per split a multinomial count, matrix
    entry powers, and grouped component raw moments.
    """
    beta = check_multiindex(beta)
    C = np.atleast_2d(np.asarray(C, dtype=float))
    d, m = C.shape
    if len(beta) != d:
        raise ValueError("index dimension != matrix rows")
    if sum(beta) > 12:
        raise ValueError("pushforward moment order capped at 12")

    states = {(0,) * m: 1.0}
    for i, bi in enumerate(beta):
        if bi == 0:
            continue
        splits = []
        for comp in enumerate_multiindices(m, bi):
            w = math.factorial(bi)
            entry = 1.0
            for j, kij in enumerate(comp):
                w //= math.factorial(kij)
                if kij:
                    entry *= C[i, j] ** kij
            if entry != 0.0:
                splits.append((comp, w * entry))
        new: dict = {}
        for exps, coeff in states.items():
            for comp, w in splits:
                ne = tuple(e + a for e, a in zip(exps, comp))
                new[ne] = new.get(ne, 0.0) + coeff * w
        states = new

    total = 0.0
    for exps, coeff in states.items():
        val = coeff
        for j, e in enumerate(exps):
            if e:
                val *= raw_moment(comps[j], e)
                if val == 0.0:
                    break
        total += val
    return total


def moment_gap(C: np.ndarray, comps, beta) -> float:
    """E[(C Y)^beta] - E[(C G)^beta] with G standard normal of the same shape.

    Identically zero for orders <= 2 (the catalog matches mean and
    covariance), returned as an exact 0 there.
    """
    beta = check_multiindex(beta)
    if sum(beta) <= 2:
        return 0.0
    comps = tuple(comps)
    if all(c.kind == "standard_normal" for c in comps):
        return 0.0
    gauss = tuple(standard_normal() for _ in comps)
    return pushforward_moment(C, comps, beta) - pushforward_moment(C, gauss, beta)


def summand_moment_gap(model: ModelSpec, k: int, beta) -> float:
    s = model.summand(k)
    return moment_gap(s.C, s.components, beta)


def averaged_moment_gaps(model: ModelSpec, beta, i: int, j: int) -> tuple[float, float]:
    """The two per-model averages driving the explicit order-3 correctors:
    the plain average of summand moment gaps, and the average weighted by
    the (i, j) entry of each summand covariance (i, j 0-based)."""
    beta = check_multiindex(beta)
    plain = 0.0
    weighted = 0.0
    for rec, idxs in model.unique_summands():
        gap = moment_gap(rec.C, rec.components, beta)
        sig = rec.sigma()[i, j]
        plain += gap * len(idxs)
        weighted += gap * sig * len(idxs)
    return plain / model.n, weighted / model.n


def _sub_multiindices(beta):
    ranges = [range(b + 1) for b in beta]
    out = [()]
    for r in ranges:
        out = [prefix + (v,) for prefix in out for v in r]
    return out


def exact_sum_moment(model: ModelSpec, beta) -> float:
    """Exact E[S_n^beta] by dynamic programming over summands.

    State: remaining multiplicity gamma <= beta.  Each summand absorbs a
    part delta of gamma with split count prod_i C(gamma_i, delta_i) and
    factor n^{-|delta|/2} E[(C_k Y_k)^delta]; parts with |delta| = 1 vanish
    because summands are centered.
    """
    beta = check_multiindex(beta)
    if len(beta) != model.d:
        raise ValueError("index dimension != model dimension")
    if sum(beta) > 8:
        raise ValueError("exact sum moment order capped at 8")
    subs = _sub_multiindices(beta)
    scale = {delta: float(model.n) ** (-0.5 * sum(delta)) for delta in subs}

    # per-record pushforward moments, cached over distinct summand records
    def record_moments(rec):
        out = {}
        for delta in subs:
            tot = sum(delta)
            if tot in (0, 1):
                out[delta] = 0.0 if tot == 1 else 1.0
            else:
                out[delta] = pushforward_moment(rec.C, rec.components, delta)
        return out

    state = {(0,) * model.d: 1.0}
    if model.iid:
        plan = [(record_moments(model.summands[0]), model.n)]
    else:
        plan = [(record_moments(s), 1) for s in model.summands]

    for moments, reps in plan:
        usable = [
            (delta, moments[delta])
            for delta in subs
            if sum(delta) != 1 and (moments[delta] != 0.0 or sum(delta) == 0)
        ]
        for _ in range(reps):
            new: dict = {}
            for gamma, acc in state.items():
                for delta, mom in usable:
                    ng = tuple(g + dv for g, dv in zip(gamma, delta))
                    if any(x > b for x, b in zip(ng, beta)):
                        continue
                    split = 1.0
                    for gv, dv in zip(ng, delta):
                        split *= math.comb(gv, dv)
                    new[ng] = new.get(ng, 0.0) + acc * split * mom * scale[delta]
            state = new
    return state.get(beta, 0.0)
