"""
Exception Hierarchy
Every failure raised by the library derives from BehaviourError
"""

from typing import List, Optional, Sequence


class BehaviourError(Exception):
    """Base class for all computation errors (CLI exit code 1)"""


class ConfigError(BehaviourError):
    """Invalid configuration or usage (CLI exit code 2)"""


# Data ingestion

class SchemaError(BehaviourError):
    """A required column is missing from the input"""

    def __init__(self, column: str, message: Optional[str] = None):
        self.column = column
        super().__init__(message or f"Missing required column '{column}'")


class ParseError(BehaviourError):
    """A cell could not be parsed as a number"""

    def __init__(self, row: int, column: str, value: object):
        self.row = row
        self.column = column
        super().__init__(f"Row {row}: column '{column}' has non-numeric value {value!r}")


class DataValidationError(BehaviourError):
    """Account data violates a domain rule"""

    def __init__(self, message: str, account_ids: Optional[Sequence[str]] = None, month: Optional[int] = None):
        self.account_ids: List[str] = list(account_ids or [])
        self.month = month
        super().__init__(message)


class SyntheticSpecError(BehaviourError):
    """Synthetic portfolio specification is invalid"""


# Time series modelling

class TooShortError(BehaviourError):
    """Series is shorter than the minimum length for VAR(1) fitting"""

    def __init__(self, t_len: int, t_min: int):
        self.t_len = t_len
        self.t_min = t_min
        super().__init__(f"Series length {t_len} is below the minimum {t_min}")


class DegenerateSeriesError(BehaviourError):
    """Lagged regressors are collinear or constant"""


# Geometry and dissimilarity

class EllipsoidError(BehaviourError):
    """Confidence ellipsoid cannot be formed"""


class DissimilarityError(BehaviourError):
    """Pairwise dissimilarity failed for a specific account"""

    def __init__(self, account_id: str, cause: Exception):
        self.account_id = account_id
        self.cause = cause
        super().__init__(f"Account '{account_id}': {cause}")


class ClusteringError(BehaviourError):
    """k-medoids inputs are out of range"""


# Scoring and evaluation

class ScoringError(BehaviourError):
    """Logistic model cannot be fitted or applied"""


class OneClassError(ScoringError):
    """Labels contain a single class"""


class RankDeficientError(ScoringError):
    """Design matrix columns are linearly dependent"""

    def __init__(self, columns: Sequence[str]):
        self.columns = list(columns)
        super().__init__(f"Design matrix is rank deficient; collinear columns: {', '.join(self.columns)}")


class MetricError(BehaviourError):
    """Scorecard metric inputs are invalid"""
