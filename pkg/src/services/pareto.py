"""
Pareto dominance and non-dominated sorting.

All comparisons run on the oriented matrix (Minimize columns negated), where
x dominates y iff x >= y everywhere and x > y somewhere. Weights are never
consulted. Front indices are 1-based.
"""

from collections.abc import Iterator, Sequence
from typing import Any, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from src.config.settings import settings
from src.models.criteria import CriteriaSet
from src.models.errors import DimensionMismatchError
from src.models.matrix import DecisionMatrix, ensure_valid
from src.utils.logging import get_logger

logger = get_logger(__name__)


class ParetoPartition(BaseModel):
    """Assignment of every option to a Pareto front (1 = non-dominated set)."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    front_of: np.ndarray
    fronts: tuple[tuple[int, ...], ...]

    @field_validator("front_of", mode="before")
    @classmethod
    def as_index_array(cls, v: Any) -> np.ndarray:
        arr = np.array(v, dtype=np.int64, copy=True)
        arr.setflags(write=False)
        return arr

    @model_validator(mode="after")
    def check_partition(self) -> "ParetoPartition":
        m = self.front_of.shape[0]
        seen = sorted(i for front in self.fronts for i in front)
        if seen != list(range(m)):
            raise ValueError("fronts must partition 0..M-1")
        if any(len(front) == 0 for front in self.fronts):
            raise ValueError("fronts must be non-empty")
        for f, front in enumerate(self.fronts, start=1):
            if any(self.front_of[i] != f for i in front):
                raise ValueError("front_of disagrees with fronts")
        return self

    @property
    def front_sizes(self) -> list[int]:
        return [len(front) for front in self.fronts]

    @property
    def n_fronts(self) -> int:
        return len(self.fronts)

    @property
    def n_options(self) -> int:
        return int(self.front_of.shape[0])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ParetoPartition):
            return NotImplemented
        return self.fronts == other.fronts and bool(np.array_equal(self.front_of, other.front_of))

    __hash__ = None  # type: ignore[assignment]


def partition_from_fronts(fronts: Sequence[Sequence[int]], m: int) -> ParetoPartition:
    """Build a partition from front lists; members are stored in ascending index order."""
    front_of = np.zeros(m, dtype=np.int64)
    ordered = []
    for f, front in enumerate(fronts, start=1):
        members = tuple(sorted(int(i) for i in front))
        front_of[list(members)] = f
        ordered.append(members)
    return ParetoPartition(front_of=front_of, fronts=tuple(ordered))


def dominates(x: Sequence[float], y: Sequence[float], criteria: CriteriaSet) -> bool:
    """
    True iff x is at least as good as y on every criterion and strictly better on one.

    Raises:
        DimensionMismatchError: If either row length differs from the criteria count
    """
    if len(x) != len(criteria) or len(y) != len(criteria):
        raise DimensionMismatchError(
            f"Rows of length {len(x)} and {len(y)} do not match {len(criteria)} criteria"
        )
    signs = criteria.signs()
    ox = np.asarray(x, dtype=np.float64) * signs
    oy = np.asarray(y, dtype=np.float64) * signs
    return bool(np.all(ox >= oy) and np.any(ox > oy))


def naive_front_sort(matrix: DecisionMatrix) -> ParetoPartition:
    """
    Repeated peeling: front 1 is everything no other option dominates; remove it, repeat.

    Builds the full pairwise dominance matrix of the remaining options on every
    peel, so it is only meant for verification and small inputs.
    """
    ensure_valid(matrix)
    oriented = matrix.oriented()
    remaining = np.arange(matrix.n_options)
    fronts: list[list[int]] = []

    while remaining.size:
        pts = oriented[remaining]
        ge = (pts[:, None, :] >= pts[None, :, :]).all(axis=2)
        gt = (pts[:, None, :] > pts[None, :, :]).any(axis=2)
        # dominated[j] <=> some i dominates j
        dominated = (ge & gt).any(axis=0)
        fronts.append(remaining[~dominated].tolist())
        remaining = remaining[dominated]

    return partition_from_fronts(fronts, matrix.n_options)


def _blocks(n: int, size: int) -> Iterator[slice]:
    for start in range(0, n, size):
        yield slice(start, min(start + size, n))


def _weak_orders(head: np.ndarray, tail: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    (head >= tail on every column, head <= tail on every column) for all row pairs.

    Accumulates one column at a time so peak memory is a few len(head) x
    len(tail) boolean grids regardless of the criteria count.
    """
    ge = np.ones((head.shape[0], tail.shape[0]), dtype=bool)
    le = np.ones_like(ge)
    for col in range(head.shape[1]):
        h = head[:, col, None]
        t = tail[None, :, col]
        ge &= h >= t
        le &= h <= t
    return ge, le


def fast_non_dominated_sort(matrix: DecisionMatrix, block_size: Optional[int] = None) -> ParetoPartition:
    """
    Domination-count bookkeeping sort (the NSGA-II primitive).

    Pass 1 compares each unordered pair once, in vectorized row blocks over the
    upper triangle, and accumulates how many options dominate each option.
    Options with count 0 form front 1. Each following front is produced by
    letting the current front's members decrement the counts of the options
    they dominate; dominated sets are regenerated per front instead of stored,
    so memory stays O(M) apart from one block.
    """
    ensure_valid(matrix)
    block_size = block_size or settings.harness.sort_block_size
    oriented = matrix.oriented()
    m = matrix.n_options
    counts = np.zeros(m, dtype=np.int64)

    for rows in _blocks(m, block_size):
        ge, le = _weak_orders(oriented[rows], oriented[rows.start :])
        # equal rows give ge & le: neither dominates
        row_dominates = ge & ~le
        col_dominates = le & ~ge
        # keep only pairs (i, j) with j > i
        upper = np.arange(rows.start, rows.stop)[:, None] < np.arange(rows.start, m)[None, :]
        counts[rows.start :] += (row_dominates & upper).sum(axis=0)
        counts[rows] += (col_dominates & upper).sum(axis=1)

    front = np.flatnonzero(counts == 0)
    assigned = np.zeros(m, dtype=bool)
    fronts: list[list[int]] = []

    while front.size:
        fronts.append(front.tolist())
        assigned[front] = True
        candidates = np.flatnonzero(~assigned)
        if candidates.size == 0:
            break
        pool = oriented[candidates]
        for part in _blocks(front.size, block_size):
            ge, le = _weak_orders(oriented[front[part]], pool)
            counts[candidates] -= (ge & ~le).sum(axis=0)
        front = candidates[counts[candidates] == 0]

    logger.debug("Non-dominated sort complete", options=m, fronts=len(fronts))
    return partition_from_fronts(fronts, m)
