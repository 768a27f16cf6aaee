"""Exception types shared across the package.

Usage errors (bad dimensions, malformed inputs) are kept distinct from
resource errors (budgets) and data errors (corrupt cache files) so the CLI
can map them to exit codes without string matching.
"""


class SphereLabError(Exception):
    """Base class for all package errors."""


class UsageError(SphereLabError):
    """Invalid request: bad dimension, malformed spec, out-of-range input."""


class BadDimension(UsageError):
    pass


class BadSpec(UsageError):
    pass


class DegenerateSum(UsageError):
    """v = 0 has no sum-hyperplane (every antipodal pair sums to it)."""


class OutOfRange(UsageError):
    """|v|^2 > 4*lambda: no shell point can pair to v."""


class BadSubspace(UsageError):
    """Claimed affine 3-space is degenerate or misses the shell."""


class TooFewPoints(UsageError):
    pass


class NonPositive(UsageError):
    pass


class BudgetExceeded(SphereLabError):
    """A configured point/pair/candidate budget would be exceeded."""


class ArithmeticOverflow(SphereLabError):
    """A counted quantity left the supported 128-bit range."""


class IoFailure(SphereLabError):
    pass


class FormatCorrupt(SphereLabError):
    """Cache file failed validation (header, count, or norm mismatch)."""


class CacheMiss(SphereLabError):
    """Requested shell not present in the cache directory."""
