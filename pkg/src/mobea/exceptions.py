"""Exception hierarchy shared by every mobea module."""


class MobeaError(Exception):
    """Base class for all errors raised by mobea."""


class DomainError(MobeaError, ValueError):
    """An argument lies outside the domain of the operation."""


class ConfigurationError(MobeaError, ValueError):
    """Inconsistent scenario or solver configuration."""


class DegenerateDataError(MobeaError, ValueError):
    """The measurements carry no usable spread (e.g. constant moduli)."""


class OvercompleteSupportError(MobeaError, ValueError):
    """An active set has more atoms than there are sensors."""


class NotAdmissibleError(MobeaError, ValueError):
    """Fewer estimates than true sources; the trial is excluded from RMSE."""


class KneeUnavailableError(MobeaError, RuntimeError):
    """No eligible point on the Pareto front to take the knee from."""


class EstimationFailedError(MobeaError, RuntimeError):
    """The solver never produced a knee solution.

    Parameters
    ----------
    message : str
    trace : list
        Per-generation trace collected before the failure.
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = list(trace or [])
