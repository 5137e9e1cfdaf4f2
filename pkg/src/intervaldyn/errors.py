"""Exception types shared across the package."""


class IntervalDynError(Exception):
    """Base class for all package errors."""


class CriticalPoint(IntervalDynError):
    """Evaluation was requested at (or within tolerance of) a critical point."""

    def __init__(self, x, c):
        super().__init__(f"x={x!r} is within tolerance of critical point c={c!r}")
        self.x = x
        self.c = c


class RangeViolation(IntervalDynError):
    """A branch produced a value outside [0,1] beyond rounding tolerance."""


class FlatBranch(IntervalDynError):
    """The power-law exponent at a critical point could not be certified."""


class GapOverlap(IntervalDynError):
    """Surgery gaps intersect each other or a critical point."""


class MapSpecError(IntervalDynError):
    """A map-spec file failed to parse; carries line information."""

    def __init__(self, message, line=None):
        loc = f" (line {line})" if line is not None else ""
        super().__init__(message + loc)
        self.line = line


class DegenerateFamily(IntervalDynError):
    """Some iterate fixes a whole interval; the map is not non-degenerated."""


class ResolutionTooFine(IntervalDynError):
    """Grid resolution below the memory guard."""


class DichotomyViolation(IntervalDynError):
    """Two critical components overlap substantially but not near-totally."""

    def __init__(self, c1, c2, fraction):
        super().__init__(
            f"components of {c1!r} and {c2!r} overlap with fraction {fraction:.3f}: "
            f"neither disjoint nor equal; resolution is likely too coarse"
        )
        self.fraction = fraction


class ShadowingFailed(IntervalDynError):
    """A connecting segment to the target orbit was not found in the horizon."""


class EnvelopeViolation(IntervalDynError):
    """An observed partial average escaped its certified envelope (precision bug)."""


class NotClassified(IntervalDynError):
    """An operation required a classified attractor but got Unresolved."""
