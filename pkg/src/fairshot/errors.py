"""Exception types raised across the library.

Every named failure mode gets its own class so callers (and tests) can catch
precisely; everything derives from FairshotError.
"""


class FairshotError(Exception):
    """Base class for all fairshot errors."""


class SchemaError(FairshotError):
    """Input file or table does not match the declared schema."""


class EncodingError(FairshotError):
    """Label or sensitive column cannot be mapped to a binary encoding."""


class EmptyInputError(FairshotError):
    """An operation received no usable rows."""


class PartitionError(FairshotError):
    """Client partition request cannot be satisfied."""


class SamplingError(FairshotError):
    """Subsampling request cannot be satisfied."""


class ConfigError(FairshotError):
    """A configuration value is out of range or inconsistent."""


class DimensionError(FairshotError):
    """Array shapes or dimensions do not line up."""


class UnderdeterminedError(FairshotError):
    """The effective training set is empty, so the fit is underdetermined."""


class DivergenceError(FairshotError):
    """An iterate became non-finite during optimization."""


class NumericalError(FairshotError):
    """A numeric input was non-finite or otherwise unusable."""


class MetricUndefinedError(FairshotError):
    """A group-fairness metric has an empty conditioning group."""


class CheckError(FairshotError):
    """The proxy fairness audit could not be completed."""


class GenerationError(FairshotError):
    """Fair proxy generation could not meet its budget.

    Carries `best_dbc`, the smallest |DBC| achieved during the sweep.
    """

    def __init__(self, message: str, best_dbc: float | None = None):
        super().__init__(message)
        self.best_dbc = best_dbc


class DegenerateDataError(FairshotError):
    """Client data lacks both label classes or both sensitive groups."""


class RankingError(FairshotError):
    """Client unfairness ranking failed for a specific client."""


class ScenarioError(FairshotError):
    """Scenario construction failed."""


class EvaluationError(FairshotError):
    """Model evaluation failed."""


class ReportError(FairshotError):
    """Report files could not be written or read back."""
