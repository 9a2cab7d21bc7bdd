"""Exception types shared across the package."""


class CslError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(CslError):
    """Operands have incompatible dimensions."""


class NotSymmetric(CslError):
    """Matrix asymmetry exceeds tolerance."""


class NotPositiveDefinite(CslError):
    """Matrix has a non-positive (or numerically zero) eigenvalue."""


class NotNegativeDefinite(CslError):
    """Matrix has a non-negative eigenvalue where negative definiteness is required."""


class NotHurwitz(CslError):
    """Matrix has an eigenvalue with non-negative real part."""


class ResidualTooLarge(CslError):
    """A solve produced a residual above its contract."""


class NonFinite(CslError):
    """A state or update left the finite floating-point range."""


class NonPositiveRate(CslError):
    """Contraction rate must be positive for this bound."""


class RateOutOfRange(CslError):
    """Discrete contraction factor must lie in (0, 1)."""


class VirtualMismatch(CslError):
    """Virtual system disagrees with the original dynamics on the diagonal."""


class MissingHessian(CslError):
    """Exact Jacobian requested but the loss carries no Hessian."""


class IndexOutOfRange(CslError):
    """Example index outside the training set."""


class UnknownRegime(CslError):
    """Unrecognized stability-bound regime."""


class NonPositiveParameter(CslError):
    """A bound parameter that must be positive is not."""


class DegeneratePair(CslError):
    """All probe pairs coincided; no contraction ratio is defined."""


class MissingReport(CslError):
    """A report file required for rendering does not exist or does not parse."""


class ConfigInvalid(CslError):
    """Experiment configuration failed schema validation."""
