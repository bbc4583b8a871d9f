"""Edgeworth corrector polynomials for scaled sums of independent,
non-identically distributed random vectors, plus the sampling and
experiment machinery used to verify their convergence rates."""

from .corrector import (
    CorrectorPolynomial,
    DiffOp,
    corrector_index_tuples,
    corrector_operator,
    corrector_polynomial,
    edgeworth_expectation,
    explicit_order3,
    hermitize,
    normalize,
    order2_discrepancy_terms,
    order_discrepancy,
)
from .errors import CertificateError, KernelMomentError, NumericalGuardError
from .hermite import (
    Polynomial,
    duality_check,
    gauss_hermite,
    gaussian_moment,
    hermite1d,
    hermite_eval,
    hermite_inner,
)
from .moments import (
    ComponentDistribution,
    ModelSpec,
    Summand,
    averaged_moment_gaps,
    exact_sum_moment,
    gaussian_mixture,
    iid_model,
    iid_vector_model,
    moment_gap,
    pushforward_moment,
    rademacher,
    raw_moment,
    skewed_two_point,
    standard_normal,
    two_point,
    uniform_centered,
)
from .multiindex import concat, enumerate_multiindices, multinomial_weight

__version__ = "0.1.0"
