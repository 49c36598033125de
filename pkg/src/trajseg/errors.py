"""Exception taxonomy shared across the pipeline.

Exit-code mapping used by the CLI: usage errors exit 1, schema errors
exit 2, data/content errors exit 3.
"""


class TrajsegError(Exception):
    """Base class for all pipeline errors."""

    exit_code = 3


class UsageError(TrajsegError):
    """Bad invocation: unknown flags, missing arguments, bad flag values."""

    exit_code = 1


class SchemaError(TrajsegError):
    """Input does not match the declared schema (missing columns, bad units)."""

    exit_code = 2


class DataError(TrajsegError):
    """Well-formed input with invalid content (e.g. non-monotone timestamps)."""

    exit_code = 3


class DegenerateSeriesError(DataError):
    """Series too short for the requested operation."""


class DegenerateTripError(DataError):
    """Trip with fewer than two samples."""


class ContractError(TrajsegError):
    """A caller violated an API precondition (programming error, not input)."""


class PlanError(TrajsegError):
    """A synthetic scenario plan is malformed or physically unrealizable."""


class NotApplicableError(TrajsegError):
    """Operation does not apply to this scenario/regime type."""


class MissingSignalError(DataError):
    """A required signal channel is absent and no proxy is enabled."""


class EmptySampleError(DataError):
    """An aggregate was requested over zero values."""


class UnderdeterminedFitError(DataError):
    """Not enough data support to fit the requested model."""

    def __init__(self, message, deficient_bins=()):
        super().__init__(message)
        self.deficient_bins = list(deficient_bins)
