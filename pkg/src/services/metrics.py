"""
Selection-quality metrics against a Pareto partition.

ONVGR of a front is the share of that front's options that made it into the
selection: |selection & front f| / |front f|.
"""

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.models.errors import InvalidArgumentError
from src.models.ranking import Selection
from src.services.pareto import ParetoPartition
from src.utils.logging import get_logger

logger = get_logger(__name__)


class FrontCoverage(BaseModel):
    """How much of one front a selection covers."""

    model_config = ConfigDict(frozen=True)

    front_index: int = Field(ge=1)
    front_size: int = Field(ge=1)
    selected_in_front: int = Field(ge=0)
    onvgr: float = Field(ge=0.0, le=1.0)

    @model_validator(mode="after")
    def check_ratio(self) -> "FrontCoverage":
        if self.selected_in_front > self.front_size:
            raise ValueError("selected_in_front exceeds front_size")
        if self.onvgr != self.selected_in_front / self.front_size:
            raise ValueError("onvgr must equal selected_in_front / front_size")
        return self


class SelectionQuality(BaseModel):
    """Per-front coverage from front 1 down to the deepest front the selection reaches."""

    model_config = ConfigDict(frozen=True)

    coverages: tuple[FrontCoverage, ...] = Field(min_length=1)
    fronts_spanned: int = Field(ge=1)

    @model_validator(mode="after")
    def check_span(self) -> "SelectionQuality":
        if len(self.coverages) != self.fronts_spanned:
            raise ValueError("one coverage entry per front up to fronts_spanned")
        if self.coverages[-1].selected_in_front < 1:
            raise ValueError("the deepest covered front must hold a selected option")
        return self

    @property
    def per_front_selected_counts(self) -> list[int]:
        return [c.selected_in_front for c in self.coverages]

    @property
    def total_selected(self) -> int:
        return sum(self.per_front_selected_counts)

    @property
    def front1_onvgr(self) -> float:
        return self.coverages[0].onvgr


def evaluate_selection(selection: Selection, partition: ParetoPartition) -> SelectionQuality:
    """
    Count selected options per front and derive ONVGR.

    Fronts between 1 and the deepest one touched are all reported, with
    ONVGR 0 where nothing was selected.

    Raises:
        InvalidArgumentError: If the selection is empty or references unknown options
    """
    if not selection.indices:
        raise InvalidArgumentError("Selection is empty; at least one option is required")
    indices = np.fromiter(selection.indices, dtype=np.int64, count=len(selection.indices))
    if indices.min() < 0 or indices.max() >= partition.n_options:
        raise InvalidArgumentError(
            f"Selection references options outside 0..{partition.n_options - 1}"
        )

    selected_fronts = partition.front_of[indices]
    fronts_spanned = int(selected_fronts.max())
    per_front = np.bincount(selected_fronts, minlength=fronts_spanned + 1)[1:]
    sizes = partition.front_sizes

    coverages = tuple(
        FrontCoverage(
            front_index=f,
            front_size=sizes[f - 1],
            selected_in_front=int(per_front[f - 1]),
            onvgr=int(per_front[f - 1]) / sizes[f - 1],
        )
        for f in range(1, fronts_spanned + 1)
    )
    logger.debug(
        "Selection evaluated",
        selected=len(indices),
        fronts_spanned=fronts_spanned,
        front1_onvgr=coverages[0].onvgr,
    )
    return SelectionQuality(coverages=coverages, fronts_spanned=fronts_spanned)


def front_profile(partition: ParetoPartition) -> list[tuple[int, int]]:
    """(front index, front size) for every front."""
    return [(f, size) for f, size in enumerate(partition.front_sizes, start=1)]
