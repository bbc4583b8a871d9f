"""Shared exception types."""


class NumericalGuardError(RuntimeError):
    """A numerical sanity guard tripped (quadrature non-convergence,
    root-count bound violation, degenerate covariance, ...)."""


class CertificateError(NumericalGuardError):
    """A Doeblin certificate is invalid or yields unusable acceptance rates."""


class KernelMomentError(NumericalGuardError):
    """Super-kernel moment cancellation failed at the configured grid."""

    def __init__(self, order: int, value: float, bound: float):
        self.order = order
        self.value = value
        self.bound = bound
        super().__init__(
            f"kernel moment of order {order} is {value:.3e}, exceeds bound {bound:.1e} "
            "(grid too coarse or window too small)"
        )
