"""Exception types shared across the package."""


class RdmixError(Exception):
    """Base class for rdmix errors."""


class TruncationUnderflowError(RdmixError):
    """Truncated-normal interval probability underflowed; the requested
    window is numerically empty and usually signals a misconfigured
    component window."""


class ChainNumericalError(RdmixError):
    """A full conditional produced a non-finite location or scale.

    The chain is aborted rather than clamped; ``state_summary`` carries a
    snapshot of the offending state for post-mortem inspection.
    """

    def __init__(self, message, state_summary=None):
        super().__init__(message)
        self.state_summary = state_summary or {}


class ZeroDenominatorError(RdmixError):
    """Adherence denominator too close to zero; the fuzzy ratio is not
    identified."""


class InsufficientDrawsError(RdmixError):
    """Too few posterior draws for the requested summary (e.g. percentile
    bands need at least 40 draws)."""


class ShortSeriesError(RdmixError):
    """Trace too short for the requested batch-means analysis."""
