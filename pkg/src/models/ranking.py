"""Ranking, method trace and top-k selection models."""

from enum import Enum
from typing import Any, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.models.errors import InvalidArgumentError


class Method(str, Enum):
    """Supported MCDA ranking methods."""

    SAW = "saw"
    TOPSIS = "topsis"
    VIKOR = "vikor"

    @property
    def higher_is_better(self) -> bool:
        # VIKOR's Q is a distance-like index: the minimum wins
        return self is not Method.VIKOR


def _readonly(v: Any) -> Optional[np.ndarray]:
    if v is None:
        return None
    arr = np.array(v, dtype=np.float64, copy=True)
    arr.setflags(write=False)
    return arr


class MethodTrace(BaseModel):
    """Intermediate quantities of a ranking run; unused fields stay None."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    normalized: Optional[np.ndarray] = None
    ideal_positive: Optional[np.ndarray] = None
    ideal_negative: Optional[np.ndarray] = None
    dist_positive: Optional[np.ndarray] = None
    dist_negative: Optional[np.ndarray] = None
    utility: Optional[np.ndarray] = None
    regret: Optional[np.ndarray] = None
    group_utility: Optional[np.ndarray] = None

    @field_validator("*", mode="before")
    @classmethod
    def as_readonly(cls, v: Any) -> Optional[np.ndarray]:
        return _readonly(v)


class Ranking(BaseModel):
    """
    Ordered permutation of option indices, best first.

    ``scores`` holds each option's final method score (SAW phi, TOPSIS
    closeness, VIKOR Q) in original index order.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    order: np.ndarray
    scores: np.ndarray
    method: Method
    trace: MethodTrace = Field(default_factory=MethodTrace)

    @field_validator("order", mode="before")
    @classmethod
    def as_index_array(cls, v: Any) -> np.ndarray:
        arr = np.array(v, dtype=np.int64, copy=True)
        arr.setflags(write=False)
        return arr

    @field_validator("scores", mode="before")
    @classmethod
    def as_score_array(cls, v: Any) -> np.ndarray:
        return _readonly(v)

    @model_validator(mode="after")
    def check_permutation(self) -> "Ranking":
        m = self.scores.shape[0]
        if self.order.shape != (m,) or not np.array_equal(np.sort(self.order), np.arange(m)):
            raise ValueError("order must be a permutation of 0..M-1")
        return self

    @classmethod
    def from_scores(cls, scores: np.ndarray, method: Method, trace: MethodTrace) -> "Ranking":
        """Order by the method's sort direction; ties keep ascending index."""
        keys = -scores if method.higher_is_better else scores
        order = np.argsort(keys, kind="stable")
        return cls(order=order, scores=scores, method=method, trace=trace)

    @property
    def n_options(self) -> int:
        return int(self.scores.shape[0])

    def positions(self) -> np.ndarray:
        """1-based rank position of every option, in original index order."""
        pos = np.empty(self.n_options, dtype=np.int64)
        pos[self.order] = np.arange(1, self.n_options + 1)
        return pos


class Selection(BaseModel):
    """Set of option indices taken from the top of a ranking."""

    model_config = ConfigDict(frozen=True)

    indices: frozenset[int]
    k: int = Field(ge=1)


def select_top_k(ranking: Ranking, k: int) -> Selection:
    """The first ``min(k, M)`` options of ``ranking.order``."""
    if k < 1:
        raise InvalidArgumentError(f"k must be >= 1, got {k}")
    top = ranking.order[: min(k, ranking.n_options)]
    return Selection(indices=frozenset(int(i) for i in top), k=k)
