"""Exception taxonomy shared by every dppselect module."""


class DppSelectError(Exception):
    """Base class for all dppselect errors."""


class MalformedManifest(DppSelectError):
    """Manifest directory violates the documented schema."""


class DimensionMismatch(DppSelectError):
    """Embedding dimensions disagree between inputs that must share one."""


class EmptyStream(DppSelectError):
    """A frame stream contains no frames."""


class ZeroVector(DppSelectError):
    """A vector with (near-)zero norm cannot be normalized."""


class BudgetExceedsFrames(DppSelectError):
    """Requested frame budget exceeds the number of available frames."""


class UnsynchronizedStreams(DppSelectError):
    """Operation requires equal-length ego and exo streams."""


class NumericalPSDViolation(DppSelectError):
    """Matrix fails the positive-semidefiniteness tolerance."""


class NegativeEigenvalue(DppSelectError):
    """Eigenvalue input to a routine that requires a non-negative spectrum."""


class RankDeficient(DppSelectError):
    """Numerical rank of the kernel is smaller than the requested subset size."""


class InvalidBudget(DppSelectError):
    """Subset size is outside the valid range for the kernel."""


class TooLarge(DppSelectError):
    """Exhaustive enumeration would exceed the subset-count guard."""


class AllZeroDeterminants(DppSelectError):
    """Every size-k principal minor vanishes; the distribution is undefined."""


class IndexOutOfRange(DppSelectError):
    """Frame index does not exist in its stream."""


class InvalidSpec(DppSelectError):
    """Synthetic-data specification violates its own constraints."""
