"""Criterion specifications for decision matrices."""

from enum import Enum
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.models.errors import InvalidArgumentError


class Direction(str, Enum):
    """Optimization direction of a criterion."""

    MAXIMIZE = "max"
    MINIMIZE = "min"

    @property
    def sign(self) -> float:
        """+1 for Maximize, -1 for Minimize."""
        return 1.0 if self is Direction.MAXIMIZE else -1.0

    def flipped(self) -> "Direction":
        return Direction.MINIMIZE if self is Direction.MAXIMIZE else Direction.MAXIMIZE


class CriterionSpec(BaseModel):
    """One criterion column: name, direction and optional weight."""

    model_config = ConfigDict(frozen=True)

    name: str = Field(min_length=1)
    direction: Direction
    weight: Optional[float] = Field(default=None, ge=0.0)


class CriteriaSet(BaseModel):
    """
    Ordered criterion axis of a decision matrix.

    Name uniqueness is checked by ``validate_matrix`` rather than here, so a
    bad descriptor can still be loaded and reported in full.
    """

    model_config = ConfigDict(frozen=True)

    criteria: tuple[CriterionSpec, ...] = Field(min_length=1)

    def __len__(self) -> int:
        return len(self.criteria)

    @classmethod
    def of(cls, *specs: tuple[str, Direction | str] | tuple[str, Direction | str, float]) -> "CriteriaSet":
        """Build from ``(name, direction[, weight])`` tuples."""
        built = []
        for spec in specs:
            name, direction, *rest = spec
            built.append(
                CriterionSpec(
                    name=name,
                    direction=Direction(direction),
                    weight=rest[0] if rest else None,
                )
            )
        return cls(criteria=tuple(built))

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.criteria]

    @property
    def directions(self) -> list[Direction]:
        return [c.direction for c in self.criteria]

    def signs(self) -> np.ndarray:
        """Column signs that turn every criterion into a maximization."""
        return np.array([c.direction.sign for c in self.criteria], dtype=np.float64)

    def maximize_mask(self) -> np.ndarray:
        return np.array([c.direction is Direction.MAXIMIZE for c in self.criteria], dtype=bool)

    def weight_vector(self) -> np.ndarray:
        """Resolved weights; a criterion without an explicit weight gets 1/N."""
        n = len(self.criteria)
        return np.array(
            [c.weight if c.weight is not None else 1.0 / n for c in self.criteria],
            dtype=np.float64,
        )

    def with_weights(self, weights: list[float] | tuple[float, ...] | np.ndarray) -> "CriteriaSet":
        """Copy with explicit weights, one per criterion."""
        values = [float(w) for w in weights]
        if len(values) != len(self.criteria):
            raise InvalidArgumentError(
                f"Expected {len(self.criteria)} weights, got {len(values)}"
            )
        if any(not np.isfinite(w) or w < 0 for w in values):
            raise InvalidArgumentError(f"Weights must be finite and non-negative: {values}")
        if sum(values) == 0:
            raise InvalidArgumentError("At least one weight must be positive")
        return CriteriaSet(
            criteria=tuple(
                c.model_copy(update={"weight": w}) for c, w in zip(self.criteria, values)
            )
        )

    def subset(self, indices: list[int]) -> "CriteriaSet":
        return CriteriaSet(criteria=tuple(self.criteria[i] for i in indices))

    def to_descriptor(self) -> list[dict]:
        """Sidecar JSON form, in column order."""
        return [
            {"name": c.name, "direction": c.direction.value, "weight": c.weight}
            for c in self.criteria
        ]
