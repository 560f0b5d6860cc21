"""
Multi-criteria ranking methods: SAW, TOPSIS and VIKOR.

Every method takes a validated ``DecisionMatrix`` and returns a ``Ranking``
with its intermediates in ``Ranking.trace``. Criterion weights are rescaled to
sum to 1 before use; none of the orders below depend on the weight scale.
"""

from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.config.settings import settings
from src.models.errors import InvalidArgumentError
from src.models.matrix import DecisionMatrix, ensure_valid
from src.models.ranking import Method, MethodTrace, Ranking
from src.utils.logging import get_logger

logger = get_logger(__name__)

# C1 comparisons tolerate this much rounding in Q
DQ_TOLERANCE = 1e-12


class VikorParams(BaseModel):
    """VIKOR parameters."""

    model_config = ConfigDict(frozen=True)

    # weight of the majority-of-criteria strategy
    v: float = Field(default_factory=lambda: settings.methods.vikor_v, ge=0.0, le=1.0)


class CompromiseSet(BaseModel):
    """VIKOR compromise solution: best-Q option plus any it cannot be separated from."""

    model_config = ConfigDict(frozen=True)

    members: tuple[int, ...] = Field(min_length=1)
    condition_c1_satisfied: bool
    condition_c2_satisfied: bool

    @model_validator(mode="after")
    def single_when_accepted(self) -> "CompromiseSet":
        if self.condition_c1_satisfied and self.condition_c2_satisfied and len(self.members) != 1:
            raise ValueError("Both conditions hold, so the compromise set must be a single option")
        return self


def _normalized_weights(matrix: DecisionMatrix) -> np.ndarray:
    weights = matrix.criteria.weight_vector()
    total = weights.sum()
    if total <= 0:
        raise InvalidArgumentError("Criterion weights sum to zero")
    return weights / total


def saw_normalize(matrix: DecisionMatrix) -> np.ndarray:
    """
    Min-max normalize every column into [0, 1], higher = better.

    Maximize: (q - min) / (max - min). Minimize: (max - q) / (max - min).
    A constant column maps to 0 for every row.
    """
    ensure_valid(matrix)
    values = matrix.values
    lo = values.min(axis=0)
    hi = values.max(axis=0)
    span = hi - lo
    degenerate = span == 0
    safe_span = np.where(degenerate, 1.0, span)

    gain = (values - lo) / safe_span
    cost = (hi - values) / safe_span
    normalized = np.where(matrix.criteria.maximize_mask(), gain, cost)
    normalized[:, degenerate] = 0.0
    return normalized


def saw_rank(matrix: DecisionMatrix) -> Ranking:
    """Simple Additive Weighting: weighted sum of min-max scores, descending."""
    normalized = saw_normalize(matrix)
    scores = normalized @ _normalized_weights(matrix)
    logger.debug("SAW ranking computed", options=matrix.n_options, criteria=matrix.n_criteria)
    return Ranking.from_scores(scores, Method.SAW, MethodTrace(normalized=normalized))


def topsis_rank(matrix: DecisionMatrix) -> Ranking:
    """
    TOPSIS: relative closeness to the positive ideal, descending.

    Columns are vector-normalized (all-zero columns stay 0), weights are
    applied inside the distances, and closeness is s- / (s+ + s-), with 0.5
    when an option coincides with both ideals.
    """
    ensure_valid(matrix)
    values = matrix.values
    weights = _normalized_weights(matrix)
    maximize = matrix.criteria.maximize_mask()

    norms = np.sqrt((values**2).sum(axis=0))
    safe_norms = np.where(norms == 0, 1.0, norms)
    normalized = values / safe_norms

    col_max = normalized.max(axis=0)
    col_min = normalized.min(axis=0)
    ideal_positive = np.where(maximize, col_max, col_min)
    ideal_negative = np.where(maximize, col_min, col_max)

    dist_positive = np.sqrt((((normalized - ideal_positive) * weights) ** 2).sum(axis=1))
    dist_negative = np.sqrt((((normalized - ideal_negative) * weights) ** 2).sum(axis=1))

    total = dist_positive + dist_negative
    both_zero = total == 0
    closeness = np.where(both_zero, 0.5, dist_negative / np.where(both_zero, 1.0, total))

    trace = MethodTrace(
        normalized=normalized,
        ideal_positive=ideal_positive,
        ideal_negative=ideal_negative,
        dist_positive=dist_positive,
        dist_negative=dist_negative,
    )
    logger.debug("TOPSIS ranking computed", options=matrix.n_options, criteria=matrix.n_criteria)
    return Ranking.from_scores(closeness, Method.TOPSIS, trace)


def _unit_interval(numerator: np.ndarray, denominator: float) -> np.ndarray:
    if denominator == 0:
        return np.zeros_like(numerator)
    return numerator / denominator


def vikor_rank(matrix: DecisionMatrix, params: Optional[VikorParams] = None) -> Ranking:
    """
    VIKOR: group utility S, individual regret R, compromise index Q ascending.

    The best option is the one with minimum Q. A constant column contributes
    nothing to S and R; a Q term whose spread is zero is taken as 0.
    """
    ensure_valid(matrix)
    params = params or VikorParams()
    values = matrix.values
    weights = _normalized_weights(matrix)
    maximize = matrix.criteria.maximize_mask()

    best = np.where(maximize, values.max(axis=0), values.min(axis=0))
    worst = np.where(maximize, values.min(axis=0), values.max(axis=0))
    spread = np.abs(best - worst)
    degenerate = spread == 0

    gaps = weights * np.abs(best - values) / np.where(degenerate, 1.0, spread)
    gaps[:, degenerate] = 0.0

    utility = gaps.sum(axis=1)
    regret = gaps.max(axis=1)

    s_best, s_worst = utility.min(), utility.max()
    r_best, r_worst = regret.min(), regret.max()
    group_utility = params.v * _unit_interval(utility - s_best, s_worst - s_best) + (
        1 - params.v
    ) * _unit_interval(regret - r_best, r_worst - r_best)
    group_utility = np.clip(group_utility, 0.0, 1.0)

    trace = MethodTrace(
        ideal_positive=best,
        ideal_negative=worst,
        utility=utility,
        regret=regret,
        group_utility=group_utility,
    )
    logger.debug(
        "VIKOR ranking computed",
        options=matrix.n_options,
        criteria=matrix.n_criteria,
        v=params.v,
    )
    return Ranking.from_scores(group_utility, Method.VIKOR, trace)


def vikor_compromise(ranking: Ranking) -> CompromiseSet:
    """
    Apply the acceptable-advantage (C1) and acceptable-stability (C2) tests.

    C1: Q of the runner-up exceeds the best Q by at least DQ = 1/(M-1).
    C2: the best-Q option also attains the minimum S or the minimum R.
    Both hold -> the best option alone; only C2 fails -> the top two; C1
    fails -> every option whose Q is within DQ of the best.
    """
    if ranking.method is not Method.VIKOR:
        raise InvalidArgumentError(f"Compromise set needs a VIKOR ranking, got {ranking.method.value}")
    trace = ranking.trace
    if trace.group_utility is None or trace.utility is None or trace.regret is None:
        raise InvalidArgumentError("VIKOR ranking is missing its S/R/Q trace")

    order = ranking.order
    best = int(order[0])
    m = ranking.n_options
    if m == 1:
        return CompromiseSet(members=(best,), condition_c1_satisfied=True, condition_c2_satisfied=True)

    q = trace.group_utility
    dq = 1.0 / (m - 1)
    threshold = dq - DQ_TOLERANCE

    c1 = bool(q[order[1]] - q[best] >= threshold)
    c2 = bool(
        trace.utility[best] == trace.utility.min() or trace.regret[best] == trace.regret.min()
    )

    if c1 and c2:
        members: tuple[int, ...] = (best,)
    elif c1:
        members = (best, int(order[1]))
    else:
        members = tuple(int(i) for i in order if q[i] - q[best] < threshold)

    logger.debug("VIKOR compromise", members=len(members), c1=c1, c2=c2)
    return CompromiseSet(members=members, condition_c1_satisfied=c1, condition_c2_satisfied=c2)


def rank(matrix: DecisionMatrix, method: Method, vikor: Optional[VikorParams] = None) -> Ranking:
    """Rank with the chosen method."""
    if method is Method.SAW:
        return saw_rank(matrix)
    if method is Method.TOPSIS:
        return topsis_rank(matrix)
    return vikor_rank(matrix, vikor)
