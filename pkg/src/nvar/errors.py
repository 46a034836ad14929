"""Exception hierarchy shared across the package."""


class NvarError(Exception):
    """Base class for all errors raised by this package."""


class RankDeficientError(NvarError):
    """Design matrix is numerically rank deficient (collinear series or too many regressors)."""


class NonStationaryModelError(NvarError):
    """Model fails the stationarity check and cannot be simulated."""


class InsufficientDataError(NvarError):
    """Too few observations for the requested design (n - q < q * tau)."""


class NoFeasibleRadiusError(NvarError):
    """Every candidate radius is infeasible for at least one series."""


class HistoryTooShortError(NvarError):
    """Prediction requires at least q past observations."""


class ShapeMismatchError(NvarError):
    """Operands have incompatible dimensions."""


class InsufficientTestSpanError(NvarError):
    """Held-out span is shorter than the requested forecast horizon."""


class UnparseableRecordError(NvarError):
    """An observation record could not be parsed (carries the line number)."""


class NoCompleteCellError(NvarError):
    """No site is fully observed on any contiguous month window."""


class TooShortError(NvarError):
    """Panel too short to split at the requested fraction."""


class MissingCoordinatesError(NvarError):
    """Ordering strategy requires sensor coordinates that are absent."""


class NonConvergenceWarning(UserWarning):
    """An iterative routine hit its iteration cap; the best estimate was returned."""
