"""Core domain types shared by the ranking, sorting and harness services."""

from .criteria import CriteriaSet, CriterionSpec, Direction
from .errors import (
    CellExecutionError,
    DatasetFormatError,
    DimensionMismatchError,
    InvalidArgumentError,
    MatrixValidationError,
    ResultsFormatError,
    SensorSelectionError,
)
from .matrix import DecisionMatrix, MatrixViolation, default_option_ids, ensure_valid, validate_matrix
from .ranking import Method, MethodTrace, Ranking, Selection, select_top_k

__all__ = [
    "CriteriaSet",
    "CriterionSpec",
    "Direction",
    "DecisionMatrix",
    "MatrixViolation",
    "default_option_ids",
    "ensure_valid",
    "validate_matrix",
    "Method",
    "MethodTrace",
    "Ranking",
    "Selection",
    "select_top_k",
    "SensorSelectionError",
    "MatrixValidationError",
    "DimensionMismatchError",
    "InvalidArgumentError",
    "DatasetFormatError",
    "ResultsFormatError",
    "CellExecutionError",
]
