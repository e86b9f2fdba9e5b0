"""Exception hierarchy shared across the pipeline stages."""


class EtfcastError(Exception):
    """Base class for all pipeline errors."""


class ConfigError(EtfcastError):
    """Invalid or incomplete run configuration."""


# --- ingestion ---

class SourceUnreachableError(EtfcastError):
    """A remote source could not be reached after the retry budget."""


class EmptyRangeError(EtfcastError):
    """A price query returned no trading days (bad symbol or window)."""


class MalformedResponseError(EtfcastError):
    """A source payload could not be parsed."""

    def __init__(self, message, payload=None):
        super().__init__(message)
        self.payload = payload


class ExtractionFailedError(EtfcastError):
    """Page fetched but no article body could be extracted."""


class MissingEtfError(EtfcastError):
    """An ETF symbol is absent from the sector map."""


class DuplicateEtfError(EtfcastError):
    """An ETF symbol appears more than once in the sector map config."""


# --- sentiment ---

class SchemaViolationError(EtfcastError):
    """Scoring response failed validation after all repair retries."""


class CoverageGapError(EtfcastError):
    """A trading date has no daily sentiment record at all.

    Distinct from an imputed zero: this signals an aggregation bug.
    """


# --- features ---

class TooShortPanelError(EtfcastError):
    """Panel has fewer than two rows, no deltas can be formed."""


class InsufficientHistoryError(EtfcastError):
    """Not enough deltas to form a single lookback window."""


class EmptySliceError(EtfcastError):
    """Standardizer fit called on an empty training slice."""


class NotFittedError(EtfcastError):
    """Transform called before fit."""


# --- models ---

class NonConvergenceError(EtfcastError):
    """A statistical fit did not converge."""


class DegenerateTrainingError(EtfcastError):
    """Single-class training data for a family that requires both classes."""


class ShapeMismatchError(EtfcastError):
    """Prediction inputs do not match the family's expected shape."""


class CorruptCheckpointError(EtfcastError):
    """Checkpoint failed hash or schema validation; refusing to load."""


# --- evaluation ---

class InsufficientDataError(EtfcastError):
    """Series too short for the requested walk-forward plan."""


class AllCandidatesFailedError(EtfcastError):
    """Every hyperparameter candidate in a grid search failed."""


class LengthMismatchError(EtfcastError):
    """Paired vectors have different lengths."""


class EmptyInputError(EtfcastError):
    """Metric computation on zero-length vectors."""


# --- pipeline ---

class StageFailureError(EtfcastError):
    """A pipeline stage failed; carries the stage name."""

    def __init__(self, stage, message):
        super().__init__(f"stage '{stage}' failed: {message}")
        self.stage = stage


class MissingArchiveError(EtfcastError):
    """Plot requested for a combo with no prediction archive."""


class IncompleteRunError(EtfcastError):
    """Report requested for a run with no completed combos."""
