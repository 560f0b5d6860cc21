"""CSV files exchanged between CLI stages: rankings, partitions and selection quality."""

from pathlib import Path

import numpy as np
import pandas as pd

from src.models.errors import ResultsFormatError
from src.models.matrix import DecisionMatrix
from src.models.ranking import Ranking
from src.services.mcda import CompromiseSet
from src.services.metrics import SelectionQuality
from src.services.pareto import ParetoPartition, partition_from_fronts
from src.utils.logging import get_logger
from src.utils.tabular import read_string_table

logger = get_logger(__name__)

RANKING_COLUMNS = ["rank", "option_id", "score"]
PARTITION_COLUMNS = ["option_id", "front"]
QUALITY_COLUMNS = ["front", "front_size", "selected_in_front", "onvgr", "fronts_spanned"]
COMPROMISE_COLUMNS = ["member", "option_id", "c1", "c2"]


def _write(frame: pd.DataFrame, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, encoding="utf-8", lineterminator="\n")
    logger.info("File written", path=str(path), rows=len(frame))
    return path


def _read(path: Path, columns: list[str]) -> pd.DataFrame:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"File not found: {path}")
    try:
        frame = read_string_table(path)
    except pd.errors.EmptyDataError as e:
        raise ResultsFormatError(f"{path}: line 1: missing header") from e
    except pd.errors.ParserError as e:
        raise ResultsFormatError(f"{path}: {e}") from e
    if list(frame.columns) != columns:
        raise ResultsFormatError(
            f"{path}: line 1: expected header {','.join(columns)}, got {','.join(frame.columns)}"
        )
    return frame


def _parse_ints(frame: pd.DataFrame, column: str, path: Path) -> np.ndarray:
    out = np.empty(len(frame), dtype=np.int64)
    for row, text in enumerate(frame[column].tolist()):
        try:
            out[row] = int(text)
        except ValueError:
            raise ResultsFormatError(
                f"{path}: line {row + 2}: invalid {column} value {text!r}"
            ) from None
    return out


def write_ranking(ranking: Ranking, matrix: DecisionMatrix, path: Path) -> Path:
    """``rank,option_id,score`` best first; rank is 1-based."""
    order = ranking.order
    frame = pd.DataFrame(
        {
            "rank": np.arange(1, len(order) + 1),
            "option_id": [matrix.option_ids[i] for i in order],
            "score": [repr(float(ranking.scores[i])) for i in order],
        },
        columns=RANKING_COLUMNS,
    )
    return _write(frame, path)


def read_ranked_ids(path: Path) -> list[str]:
    """Option ids of a ranking file, best first."""
    frame = _read(path, RANKING_COLUMNS)
    ranks = _parse_ints(frame, "rank", path)
    if not np.array_equal(np.sort(ranks), np.arange(1, len(ranks) + 1)):
        raise ResultsFormatError(f"{path}: ranks must be 1..{len(ranks)} without gaps")
    return [frame["option_id"].iloc[i] for i in np.argsort(ranks, kind="stable")]


def write_partition(partition: ParetoPartition, matrix: DecisionMatrix, path: Path) -> Path:
    """``option_id,front`` in option order."""
    frame = pd.DataFrame(
        {"option_id": list(matrix.option_ids), "front": partition.front_of},
        columns=PARTITION_COLUMNS,
    )
    return _write(frame, path)


def read_partition(path: Path) -> tuple[list[str], ParetoPartition]:
    """Option ids in file order and the partition they define."""
    frame = _read(path, PARTITION_COLUMNS)
    ids = frame["option_id"].tolist()
    if len(set(ids)) != len(ids):
        raise ResultsFormatError(f"{path}: duplicate option ids")
    front_of = _parse_ints(frame, "front", path)
    if len(front_of) == 0:
        raise ResultsFormatError(f"{path}: partition has no options")
    n_fronts = int(front_of.max())
    present = set(front_of.tolist())
    if front_of.min() < 1 or present != set(range(1, n_fronts + 1)):
        raise ResultsFormatError(f"{path}: front indices must cover 1..{n_fronts} without gaps")
    fronts = [np.flatnonzero(front_of == f).tolist() for f in range(1, n_fronts + 1)]
    return ids, partition_from_fronts(fronts, len(ids))


def write_quality(quality: SelectionQuality, path: Path) -> Path:
    frame = pd.DataFrame(
        [
            {
                "front": c.front_index,
                "front_size": c.front_size,
                "selected_in_front": c.selected_in_front,
                "onvgr": c.onvgr,
                "fronts_spanned": quality.fronts_spanned,
            }
            for c in quality.coverages
        ],
        columns=QUALITY_COLUMNS,
    )
    return _write(frame, path)


def write_compromise(compromise: CompromiseSet, matrix: DecisionMatrix, path: Path) -> Path:
    frame = pd.DataFrame(
        [
            {
                "member": position,
                "option_id": matrix.option_ids[index],
                "c1": compromise.condition_c1_satisfied,
                "c2": compromise.condition_c2_satisfied,
            }
            for position, index in enumerate(compromise.members, start=1)
        ],
        columns=COMPROMISE_COLUMNS,
    )
    return _write(frame, path)
