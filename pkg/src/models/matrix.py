"""Decision matrix model and its validation report."""

from collections import Counter
from collections.abc import Sequence
from typing import Any, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from src.models.criteria import CriteriaSet
from src.models.errors import InvalidArgumentError, MatrixValidationError


def default_option_ids(m: int) -> tuple[str, ...]:
    """Zero-padded ids ``s000000``, ``s000001``, ..."""
    return tuple(f"s{i:06d}" for i in range(m))


class MatrixViolation(BaseModel):
    """One invariant violation found by ``validate_matrix``."""

    model_config = ConfigDict(frozen=True)

    kind: Literal[
        "non_finite",
        "dimension_mismatch",
        "duplicate_criterion",
        "duplicate_option_id",
        "empty_option_id",
        "empty",
    ]
    message: str
    row: Optional[int] = None
    column: Optional[int] = None

    def __str__(self) -> str:
        return self.message


class DecisionMatrix(BaseModel):
    """
    M options x N criteria of raw attribute values.

    The model itself only enforces shape (a 2-D float64 grid) so that
    ``validate_matrix`` can report every content problem at once. Use
    ``from_rows`` or ``ensure_valid`` for checked construction. ``values`` is a
    read-only copy; the matrix is immutable after construction.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    values: np.ndarray
    criteria: CriteriaSet
    option_ids: tuple[str, ...] = Field(default=())

    @field_validator("values", mode="before")
    @classmethod
    def as_readonly_grid(cls, v: Any) -> np.ndarray:
        """Copy into a read-only 2-D float64 array."""
        try:
            grid = np.array(v, dtype=np.float64, copy=True)
        except (TypeError, ValueError) as exc:
            raise ValueError(f"values must be a rectangular numeric grid: {exc}") from exc
        if grid.ndim == 1 and grid.size == 0:
            grid = grid.reshape(0, 0)
        if grid.ndim != 2:
            raise ValueError(f"values must be 2-D, got {grid.ndim}-D")
        grid.setflags(write=False)
        return grid

    @field_validator("option_ids", mode="before")
    @classmethod
    def as_id_tuple(cls, v: Any) -> tuple[str, ...]:
        return tuple(str(i) for i in v)

    def model_post_init(self, __context: Any) -> None:
        if not self.option_ids:
            object.__setattr__(self, "option_ids", default_option_ids(self.values.shape[0]))

    @classmethod
    def from_rows(
        cls,
        rows: Sequence[Sequence[float]] | np.ndarray,
        criteria: CriteriaSet,
        option_ids: Optional[Sequence[str]] = None,
    ) -> "DecisionMatrix":
        """Checked constructor: raises ``MatrixValidationError`` on any violation."""
        matrix = cls(values=rows, criteria=criteria, option_ids=tuple(option_ids or ()))
        return ensure_valid(matrix)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape  # type: ignore[return-value]

    @property
    def n_options(self) -> int:
        return int(self.values.shape[0])

    @property
    def n_criteria(self) -> int:
        return int(self.values.shape[1])

    def oriented(self) -> np.ndarray:
        """Values with Minimize columns negated, so larger is better everywhere."""
        return self.values * self.criteria.signs()

    def select_columns(self, columns: Sequence[int | str]) -> "DecisionMatrix":
        """Sub-matrix of the given columns (by index or name), in the given order."""
        names = self.criteria.names
        indices = []
        for col in columns:
            if isinstance(col, str):
                if col not in names:
                    raise InvalidArgumentError(f"Unknown criterion {col!r}; have {names}")
                indices.append(names.index(col))
            else:
                if not 0 <= col < self.n_criteria:
                    raise InvalidArgumentError(f"Column {col} out of range 0..{self.n_criteria - 1}")
                indices.append(int(col))
        return DecisionMatrix.from_rows(
            self.values[:, indices],
            self.criteria.subset(indices),
            self.option_ids,
        )

    def with_criteria(self, criteria: CriteriaSet) -> "DecisionMatrix":
        """Same cells under different criteria metadata (e.g. new weights)."""
        return DecisionMatrix.from_rows(self.values, criteria, self.option_ids)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DecisionMatrix):
            return NotImplemented
        return (
            self.option_ids == other.option_ids
            and self.criteria == other.criteria
            and self.values.shape == other.values.shape
            and bool(np.array_equal(self.values, other.values))
        )

    __hash__ = None  # type: ignore[assignment]


def validate_matrix(matrix: DecisionMatrix) -> list[MatrixViolation]:
    """
    Report every invariant violation of a decision matrix.

    Returns an empty list iff the matrix is valid. Never raises.
    """
    violations: list[MatrixViolation] = []
    m, n = matrix.values.shape
    n_criteria = len(matrix.criteria.criteria)

    if m < 1:
        violations.append(MatrixViolation(kind="empty", message="Matrix has no options (M = 0)"))

    if n != n_criteria:
        violations.append(
            MatrixViolation(
                kind="dimension_mismatch",
                message=f"Matrix has {n} columns but {n_criteria} criteria",
            )
        )
    if m != len(matrix.option_ids):
        violations.append(
            MatrixViolation(
                kind="dimension_mismatch",
                message=f"Matrix has {m} rows but {len(matrix.option_ids)} option ids",
            )
        )

    for name, count in Counter(matrix.criteria.names).items():
        if count > 1:
            violations.append(
                MatrixViolation(
                    kind="duplicate_criterion",
                    message=f"Criterion name {name!r} appears {count} times",
                )
            )

    for row, option_id in enumerate(matrix.option_ids):
        if not option_id.strip():
            violations.append(
                MatrixViolation(
                    kind="empty_option_id",
                    message=f"Option id at row {row} is empty",
                    row=row,
                )
            )

    for option_id, count in Counter(matrix.option_ids).items():
        if count > 1:
            violations.append(
                MatrixViolation(
                    kind="duplicate_option_id",
                    message=f"Option id {option_id!r} appears {count} times",
                )
            )

    rows, cols = np.nonzero(~np.isfinite(matrix.values))
    for row, col in zip(rows.tolist(), cols.tolist()):
        violations.append(
            MatrixViolation(
                kind="non_finite",
                message=f"Non-finite value {matrix.values[row, col]!r} at ({row},{col})",
                row=row,
                column=col,
            )
        )

    return violations


def ensure_valid(matrix: DecisionMatrix) -> DecisionMatrix:
    """Return the matrix unchanged, or raise ``MatrixValidationError``."""
    violations = validate_matrix(matrix)
    if violations:
        raise MatrixValidationError(violations)
    return matrix
