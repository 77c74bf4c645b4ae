"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Operands have incompatible or invalid shapes."""


class SvdConvergenceError(RuntimeError):
    """The dense SVD did not converge; retrying on a perturbed input may help."""


class RankDeficiencyError(RuntimeError):
    """A sketched system was numerically rank deficient.

    Raised by the randomized factorizations; drawing a new seed or using a
    larger sketch normally fixes it.
    """

    retryable = True
