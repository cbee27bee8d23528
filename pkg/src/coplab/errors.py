"""Exception types shared across the package."""


class CoplabError(Exception):
    """Base class for all package-specific errors."""


class SingularMatrix(CoplabError):
    """A Gram matrix was numerically singular or not positive definite."""


class DimensionCap(CoplabError):
    """A discrete search exceeded the configured coordinate cap.

    Carries the offending dimension and the cap so callers can report the
    configuration that triggered the blowup.
    """

    def __init__(self, dimension: int, cap: int, kind: str = "complex"):
        self.dimension = dimension
        self.cap = cap
        self.kind = kind
        super().__init__(
            f"{kind} search dimension {dimension} exceeds cap {cap}; "
            f"the candidate grid would be infeasible to enumerate"
        )


class UnsupportedModulation(CoplabError):
    """Requested constellation size or fold mode is not supported."""


class ZeroBlock(CoplabError):
    """A transmit block degenerated to all-zero content."""
