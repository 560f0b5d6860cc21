"""
Experiment harness: rank, select top-k, sort into Pareto fronts, evaluate.

One grid cell is (method, k, n_properties, seed). Every seed gets its own
dataset shared by all of its cells; the Pareto partition of each projected
dataset is computed once and reused by every method and k.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from threading import Lock
from typing import Optional

import numpy as np
import pandas as pd
import structlog
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.config.settings import settings
from src.models.errors import (
    CellExecutionError,
    InvalidArgumentError,
    ResultsFormatError,
    SensorSelectionError,
)
from src.models.matrix import DecisionMatrix
from src.models.ranking import Method, select_top_k
from src.services.datagen import GeneratorConfig, generate, load_dataset, project_properties
from src.services.mcda import VikorParams, rank
from src.services.metrics import SelectionQuality, evaluate_selection, front_profile
from src.services.pareto import ParetoPartition, fast_non_dominated_sort
from src.utils.fingerprint import matrix_fingerprint
from src.utils.logging import get_logger, stage_timer
from src.utils.tabular import read_string_table

logger = get_logger(__name__)

RESULT_COLUMNS = [
    "method",
    "n_sensors",
    "k",
    "n_properties",
    "seed",
    "front",
    "front_size",
    "selected_in_front",
    "onvgr",
    "fronts_spanned",
]
RESULT_SORT_KEYS = ["method", "k", "n_properties", "seed", "front"]
SUMMARY_COLUMNS = [
    "method",
    "n_sensors",
    "k",
    "n_properties",
    "n_seeds",
    "onvgr_front1_mean",
    "onvgr_front1_std",
    "fronts_spanned_mean",
    "fronts_spanned_std",
]
COMPARISON_COLUMNS = [
    "k",
    "n_properties",
    "position",
    "method",
    "onvgr_front1_mean",
    "fronts_spanned_mean",
]
TIMING_COLUMNS = ["method", "k", "n_properties", "seed", "rank_ms", "sort_ms", "evaluate_ms"]
# figure values are means across seeds
COUNT_FIGURE_COLUMNS = ["front", "method", "selected_mean", "front_size_mean"]
ONVGR_FIGURE_COLUMNS = ["front", "method", "onvgr_mean"]

# share of seeds a trend must hold in
TREND_QUORUM = 0.9


class GridSpec(BaseModel):
    """Factors and levels of an experiment grid."""

    model_config = ConfigDict(frozen=True)

    n_sensors: int = Field(ge=1)
    methods: tuple[Method, ...] = Field(min_length=1)
    ks: tuple[int, ...] = Field(min_length=1)
    property_counts: tuple[int, ...] = Field(min_length=1)
    seeds: tuple[int, ...] = Field(min_length=1)
    vikor_v: float = Field(default_factory=lambda: settings.methods.vikor_v, ge=0.0, le=1.0)

    @field_validator("methods", "ks", "property_counts", "seeds")
    @classmethod
    def no_duplicates(cls, v: tuple) -> tuple:
        if len(set(v)) != len(v):
            raise ValueError(f"duplicate levels: {list(v)}")
        return v

    @field_validator("ks")
    @classmethod
    def positive_ks(cls, v: tuple[int, ...]) -> tuple[int, ...]:
        if any(k < 1 for k in v):
            raise ValueError(f"every k must be >= 1: {list(v)}")
        return v

    @field_validator("property_counts")
    @classmethod
    def property_range(cls, v: tuple[int, ...]) -> tuple[int, ...]:
        if any(not 2 <= p <= 6 for p in v):
            raise ValueError(f"property counts must be in 2..6: {list(v)}")
        return v

    @field_validator("seeds")
    @classmethod
    def u64_seeds(cls, v: tuple[int, ...]) -> tuple[int, ...]:
        if any(not 0 <= s < 2**64 for s in v):
            raise ValueError(f"seeds must be unsigned 64-bit integers: {list(v)}")
        return v

    @model_validator(mode="after")
    def ks_fit_dataset(self) -> "GridSpec":
        too_large = [k for k in self.ks if k > self.n_sensors]
        if too_large:
            raise ValueError(f"k values {too_large} exceed n_sensors={self.n_sensors}")
        return self

    @classmethod
    def full(cls, seeds: tuple[int, ...] = (1,)) -> "GridSpec":
        """The full published grid: 100,000 sensors, 1%/5%/10% selections."""
        return cls(
            n_sensors=100_000,
            methods=tuple(Method),
            ks=(1_000, 5_000, 10_000),
            property_counts=(2, 3, 4, 5, 6),
            seeds=seeds,
        )

    @classmethod
    def desk(cls, seeds: tuple[int, ...] = tuple(range(1, 11))) -> "GridSpec":
        """The published grid scaled to 10,000 sensors with the same selection fractions."""
        return cls(
            n_sensors=10_000,
            methods=tuple(Method),
            ks=(100, 500, 1_000),
            property_counts=(2, 3, 4, 5, 6),
            seeds=seeds,
        )

    @property
    def cells_per_seed(self) -> int:
        return len(self.methods) * len(self.ks) * len(self.property_counts)


class StageTimings(BaseModel):
    """Wall time per pipeline stage, in milliseconds. Zero sort time means a cache hit."""

    model_config = ConfigDict(frozen=True)

    rank_ms: float = 0.0
    sort_ms: float = 0.0
    evaluate_ms: float = 0.0


class ExperimentResult(BaseModel):
    """Outcome of one grid cell."""

    model_config = ConfigDict(frozen=True)

    method: Method
    n_sensors: int
    k: int
    n_properties: int
    seed: int
    quality: SelectionQuality
    timings: StageTimings = Field(default_factory=StageTimings)

    @property
    def sort_key(self) -> tuple:
        return (self.method.value, self.k, self.n_properties, self.seed)


class PartitionCache:
    """
    Thread-safe cache of Pareto partitions keyed by (dataset fingerprint, n_properties).

    Concurrent requests for the same key wait for a single computation.
    """

    def __init__(self) -> None:
        self._lock = Lock()
        self._entries: dict[tuple[str, int], ParetoPartition] = {}
        self._key_locks: dict[tuple[str, int], Lock] = {}

    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)

    def clear(self) -> None:
        with self._lock:
            self._entries.clear()
            self._key_locks.clear()

    def get_or_compute(
        self, fingerprint: str, n_properties: int, projected: DecisionMatrix
    ) -> tuple[ParetoPartition, bool]:
        """Return (partition, computed_now)."""
        key = (fingerprint, n_properties)
        with self._lock:
            if key in self._entries:
                return self._entries[key], False
            key_lock = self._key_locks.setdefault(key, Lock())

        with key_lock:
            with self._lock:
                if key in self._entries:
                    return self._entries[key], False
            partition = fast_non_dominated_sort(projected)
            with self._lock:
                self._entries[key] = partition
            return partition, True


def run_cell(
    matrix: DecisionMatrix,
    method: Method,
    k: int,
    n_properties: int,
    vikor_v: Optional[float] = None,
    *,
    seed: int = 0,
    cache: Optional[PartitionCache] = None,
    fingerprint: Optional[str] = None,
) -> ExperimentResult:
    """
    Run one cell of the evaluation workflow.

    Projects the dataset onto ``n_properties`` columns, ranks it, takes the
    top ``k``, sorts the whole projected dataset into Pareto fronts (cached)
    and evaluates the selection against them.

    Raises:
        CellExecutionError: Wrapping any validation fault, with the cell coordinates
    """
    if cache is None:
        cache = PartitionCache()
    cell = {
        "method": method.value,
        "k": k,
        "n_properties": n_properties,
        "seed": seed,
    }
    with structlog.contextvars.bound_contextvars(cell=cell):
        try:
            if k > matrix.n_options:
                raise InvalidArgumentError(f"k={k} exceeds the {matrix.n_options} available options")
            projected = project_properties(matrix, n_properties)
            vikor = VikorParams(v=vikor_v) if vikor_v is not None else VikorParams()

            with stage_timer(logger, "rank") as rank_timing:
                ranking = rank(projected, method, vikor)
                selection = select_top_k(ranking, k)

            with stage_timer(logger, "sort") as sort_timing:
                partition, computed = cache.get_or_compute(
                    fingerprint or matrix_fingerprint(matrix), n_properties, projected
                )

            with stage_timer(logger, "evaluate") as evaluate_timing:
                quality = evaluate_selection(selection, partition)
        except SensorSelectionError as e:
            logger.error("Cell failed", error=str(e))
            raise CellExecutionError(cell, e) from e
        except ValueError as e:
            logger.error("Cell failed", error=str(e))
            raise CellExecutionError(cell, InvalidArgumentError(str(e))) from e

    return ExperimentResult(
        method=method,
        n_sensors=matrix.n_options,
        k=k,
        n_properties=n_properties,
        seed=seed,
        quality=quality,
        timings=StageTimings(
            rank_ms=rank_timing["ms"],
            sort_ms=sort_timing["ms"] if computed else 0.0,
            evaluate_ms=evaluate_timing["ms"],
        ),
    )


def results_frame(results: list[ExperimentResult]) -> pd.DataFrame:
    """One row per (cell, front) in the results.csv schema, sorted for byte-stable output."""
    rows = [
        {
            "method": r.method.value,
            "n_sensors": r.n_sensors,
            "k": r.k,
            "n_properties": r.n_properties,
            "seed": r.seed,
            "front": c.front_index,
            "front_size": c.front_size,
            "selected_in_front": c.selected_in_front,
            "onvgr": c.onvgr,
            "fronts_spanned": r.quality.fronts_spanned,
        }
        for r in results
        for c in r.quality.coverages
    ]
    frame = pd.DataFrame(rows, columns=RESULT_COLUMNS)
    return frame.sort_values(RESULT_SORT_KEYS, kind="mergesort").reset_index(drop=True)


def summarize(results: pd.DataFrame) -> pd.DataFrame:
    """Mean and population std of front-1 ONVGR and fronts_spanned per cell, across seeds."""
    front1 = results[results["front"] == 1]
    if front1.empty:
        return pd.DataFrame(columns=SUMMARY_COLUMNS)
    grouped = front1.groupby(["method", "n_sensors", "k", "n_properties"], sort=True)
    summary = grouped.agg(
        n_seeds=("seed", "nunique"),
        onvgr_front1_mean=("onvgr", "mean"),
        onvgr_front1_std=("onvgr", lambda s: float(np.std(s.to_numpy(), ddof=0))),
        fronts_spanned_mean=("fronts_spanned", "mean"),
        fronts_spanned_std=("fronts_spanned", lambda s: float(np.std(s.to_numpy(), ddof=0))),
    ).reset_index()
    return summary[SUMMARY_COLUMNS]


def compare_methods(summary: pd.DataFrame) -> pd.DataFrame:
    """
    Order the methods within each (k, n_properties).

    Best first: highest mean front-1 ONVGR, then fewest fronts spanned, then
    method name.
    """
    if summary.empty:
        return pd.DataFrame(columns=COMPARISON_COLUMNS)
    ordered = summary.assign(_neg_onvgr=-summary["onvgr_front1_mean"]).sort_values(
        ["k", "n_properties", "_neg_onvgr", "fronts_spanned_mean", "method"], kind="mergesort"
    )
    ordered["position"] = ordered.groupby(["k", "n_properties"]).cumcount() + 1
    return ordered[COMPARISON_COLUMNS].reset_index(drop=True)


class TrendCheck(BaseModel):
    """One trend evaluated across seeds."""

    model_config = ConfigDict(frozen=True)

    check: str
    method: str
    n_properties: Optional[int] = None
    satisfied: int
    total: int

    @property
    def holds(self) -> bool:
        return self.total > 0 and self.satisfied >= TREND_QUORUM * self.total


class TrendReport(BaseModel):
    """Trend checks over a results table."""

    model_config = ConfigDict(frozen=True)

    checks: tuple[TrendCheck, ...] = ()

    @property
    def all_hold(self) -> bool:
        return all(c.holds for c in self.checks)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [
                {
                    "check": c.check,
                    "method": c.method,
                    "n_properties": "" if c.n_properties is None else c.n_properties,
                    "satisfied": c.satisfied,
                    "total": c.total,
                    "holds": c.holds,
                }
                for c in self.checks
            ],
            columns=["check", "method", "n_properties", "satisfied", "total", "holds"],
        )


def _non_decreasing(values: np.ndarray) -> bool:
    return bool(np.all(np.diff(values) >= 0))


def check_trends(results: pd.DataFrame) -> TrendReport:
    """
    Evaluate the selection-quality trends on a results table.

    - ``fewer_properties_higher_onvgr``: per method and seed, mean front-1 ONVGR
      over all ks at the smallest property count exceeds that at the largest.
    - ``onvgr_non_decreasing_in_k``: per method, property count and seed.
    - ``fronts_non_decreasing_in_k``: same, for fronts_spanned.
    """
    front1 = results[results["front"] == 1]
    checks: list[TrendCheck] = []
    if front1.empty:
        return TrendReport()

    props = sorted(front1["n_properties"].unique())
    for method, by_method in front1.groupby("method", sort=True):
        if len(props) >= 2:
            lo, hi = props[0], props[-1]
            satisfied = total = 0
            for _, by_seed in by_method.groupby("seed", sort=True):
                low_props = by_seed.loc[by_seed["n_properties"] == lo, "onvgr"]
                high_props = by_seed.loc[by_seed["n_properties"] == hi, "onvgr"]
                if low_props.empty or high_props.empty:
                    continue
                total += 1
                satisfied += int(low_props.mean() > high_props.mean())
            checks.append(
                TrendCheck(
                    check="fewer_properties_higher_onvgr",
                    method=str(method),
                    satisfied=satisfied,
                    total=total,
                )
            )

        for n_props, by_props in by_method.groupby("n_properties", sort=True):
            by_seed = [s.sort_values("k") for _, s in by_props.groupby("seed", sort=True)]
            for name, column in (
                ("onvgr_non_decreasing_in_k", "onvgr"),
                ("fronts_non_decreasing_in_k", "fronts_spanned"),
            ):
                checks.append(
                    TrendCheck(
                        check=name,
                        method=str(method),
                        n_properties=int(n_props),
                        satisfied=sum(_non_decreasing(s[column].to_numpy()) for s in by_seed),
                        total=len(by_seed),
                    )
                )

    report = TrendReport(checks=tuple(checks))
    logger.info(
        "Trend checks evaluated",
        checks=len(report.checks),
        holding=sum(c.holds for c in report.checks),
    )
    return report


def _write_csv(frame: pd.DataFrame, path: Path) -> Path:
    frame.to_csv(path, index=False, encoding="utf-8", lineterminator="\n")
    logger.info("File written", path=str(path), rows=len(frame))
    return path


def _ensure_writable(out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    if not os.access(out_dir, os.W_OK):
        raise PermissionError(f"Output directory is not writable: {out_dir}")


def write_timings(results: list[ExperimentResult], path: Path) -> Path:
    """Per-cell stage wall times; not part of the deterministic outputs."""
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(
        [
            {
                "method": r.method.value,
                "k": r.k,
                "n_properties": r.n_properties,
                "seed": r.seed,
                "rank_ms": round(r.timings.rank_ms, 3),
                "sort_ms": round(r.timings.sort_ms, 3),
                "evaluate_ms": round(r.timings.evaluate_ms, 3),
            }
            for r in sorted(results, key=lambda r: r.sort_key)
        ],
        columns=TIMING_COLUMNS,
    )
    return _write_csv(frame, path)


def run_grid(
    spec: GridSpec,
    out_dir: Path,
    dataset_path: Optional[Path] = None,
    *,
    max_workers: Optional[int] = None,
    cache: Optional[PartitionCache] = None,
) -> list[ExperimentResult]:
    """
    Execute every cell for every seed and persist the grid outputs.

    Writes ``results.csv``, ``fronts_<n>.csv`` per property count,
    ``summary.csv`` and ``comparison.csv`` into ``out_dir``. Output bytes
    depend only on the GridSpec and dataset, never on worker count.

    Raises:
        OSError: If ``out_dir`` cannot be created or written, before any computation
        CellExecutionError: If any cell fails
    """
    out_dir = Path(out_dir)
    _ensure_writable(out_dir)
    if cache is None:
        cache = PartitionCache()
    max_workers = max_workers or settings.harness.max_workers

    shared: Optional[DecisionMatrix] = None
    if dataset_path is not None:
        shared = load_dataset(Path(dataset_path))
        if shared.n_options != spec.n_sensors:
            raise InvalidArgumentError(
                f"Dataset {dataset_path} has {shared.n_options} options, spec says {spec.n_sensors}"
            )

    logger.info(
        "Grid started",
        n_sensors=spec.n_sensors,
        cells_per_seed=spec.cells_per_seed,
        seeds=len(spec.seeds),
        max_workers=max_workers,
    )

    datasets: dict[int, tuple[DecisionMatrix, str]] = {}
    for seed in spec.seeds:
        if shared is not None:
            matrix = shared
        else:
            matrix = generate(GeneratorConfig(n_sensors=spec.n_sensors, seed=seed))
        datasets[seed] = (matrix, matrix_fingerprint(matrix))

    cells = [
        (seed, n_props, method, k)
        for seed in spec.seeds
        for n_props in spec.property_counts
        for method in spec.methods
        for k in spec.ks
    ]

    def execute(cell: tuple[int, int, Method, int]) -> ExperimentResult:
        seed, n_props, method, k = cell
        matrix, fingerprint = datasets[seed]
        return run_cell(
            matrix,
            method,
            k,
            n_props,
            spec.vikor_v,
            seed=seed,
            cache=cache,
            fingerprint=fingerprint,
        )

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(execute, cells))
    else:
        results = [execute(cell) for cell in cells]
    results.sort(key=lambda r: r.sort_key)

    results_table = results_frame(results)
    _write_csv(results_table, out_dir / "results.csv")

    for n_props in sorted(spec.property_counts):
        rows = []
        for seed in sorted(spec.seeds):
            matrix, fingerprint = datasets[seed]
            partition, _ = cache.get_or_compute(
                fingerprint, n_props, project_properties(matrix, n_props)
            )
            rows.extend(
                {"seed": seed, "front": f, "front_size": size} for f, size in front_profile(partition)
            )
        _write_csv(
            pd.DataFrame(rows, columns=["seed", "front", "front_size"]),
            out_dir / f"fronts_{n_props}.csv",
        )

    summary = summarize(results_table)
    _write_csv(summary, out_dir / "summary.csv")
    _write_csv(compare_methods(summary), out_dir / "comparison.csv")

    logger.info("Grid complete", results=len(results), out_dir=str(out_dir))
    return results


_RESULT_INT_COLUMNS = [
    "n_sensors",
    "k",
    "n_properties",
    "seed",
    "front",
    "front_size",
    "selected_in_front",
    "fronts_spanned",
]


def read_results(path: Path) -> pd.DataFrame:
    """
    Load and type-check a results.csv.

    Raises:
        FileNotFoundError: If the file does not exist
        ResultsFormatError: On a wrong header or an unparseable cell, with its line number
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Results file not found: {path}")
    try:
        raw = read_string_table(path)
    except pd.errors.EmptyDataError as e:
        raise ResultsFormatError(f"{path}: line 1: missing header") from e
    except pd.errors.ParserError as e:
        raise ResultsFormatError(f"{path}: {e}") from e

    if list(raw.columns) != RESULT_COLUMNS:
        raise ResultsFormatError(
            f"{path}: line 1: expected header {','.join(RESULT_COLUMNS)}, got {','.join(raw.columns)}"
        )

    methods = {m.value for m in Method}
    parsed: dict[str, list] = {column: [] for column in RESULT_COLUMNS}
    # header is line 1
    for line, record in enumerate(raw.itertuples(index=False, name=None), start=2):
        for column, text in zip(RESULT_COLUMNS, record):
            try:
                if column == "method":
                    if text not in methods:
                        raise ValueError(text)
                    parsed[column].append(text)
                elif column == "onvgr":
                    parsed[column].append(float(text))
                else:
                    parsed[column].append(int(text))
            except ValueError:
                raise ResultsFormatError(
                    f"{path}: line {line}: invalid {column} value {text!r}"
                ) from None

    frame = pd.DataFrame(parsed, columns=RESULT_COLUMNS)
    return frame.astype({**{c: "int64" for c in _RESULT_INT_COLUMNS}, "onvgr": "float64"})


def _figure_frames(group: pd.DataFrame) -> tuple[pd.DataFrame, pd.DataFrame]:
    """Per (front, method) means across seeds; fronts a seed never reached count as zero."""
    seeds = sorted(group["seed"].unique())
    methods = sorted(group["method"].unique())
    fronts = range(1, int(group["front"].max()) + 1)
    full = pd.MultiIndex.from_product([seeds, methods, fronts], names=["seed", "method", "front"])

    observed = group.set_index(["seed", "method", "front"])[["selected_in_front", "onvgr"]]
    filled = observed.reindex(full, fill_value=0).reset_index()
    sizes = group.groupby(["seed", "front"])["front_size"].first().reset_index()
    filled = filled.merge(sizes, on=["seed", "front"], how="left")

    agg = (
        filled.groupby(["front", "method"], sort=True)
        .agg(
            selected_mean=("selected_in_front", "mean"),
            front_size_mean=("front_size", "mean"),
            onvgr_mean=("onvgr", "mean"),
        )
        .reset_index()
    )
    return agg[COUNT_FIGURE_COLUMNS], agg[ONVGR_FIGURE_COLUMNS]


def emit_plot_data(results_path: Path, out_dir: Path) -> list[Path]:
    """
    Write tidy per-figure CSVs from a results.csv.

    For each (n_properties, k): ``counts_p<n>_k<k>.csv`` (front, method,
    selected_mean, front_size_mean) and ``onvgr_p<n>_k<k>.csv`` (front, method,
    onvgr_mean), each averaged over seeds. ``counts_all.csv`` and
    ``onvgr_all.csv`` stack every figure with its n_properties and k, and are
    written even when there are no results.
    """
    out_dir = Path(out_dir)
    results = read_results(Path(results_path))
    _ensure_writable(out_dir)

    written: list[Path] = []
    all_counts, all_onvgr = [], []
    for (n_props, k), group in results.groupby(["n_properties", "k"], sort=True):
        counts, onvgr = _figure_frames(group)
        written.append(_write_csv(counts, out_dir / f"counts_p{n_props}_k{k}.csv"))
        written.append(_write_csv(onvgr, out_dir / f"onvgr_p{n_props}_k{k}.csv"))
        all_counts.append(counts.assign(n_properties=n_props, k=k))
        all_onvgr.append(onvgr.assign(n_properties=n_props, k=k))

    stacked_counts = ["n_properties", "k", *COUNT_FIGURE_COLUMNS]
    stacked_onvgr = ["n_properties", "k", *ONVGR_FIGURE_COLUMNS]
    counts_all = (
        pd.concat(all_counts)[stacked_counts] if all_counts else pd.DataFrame(columns=stacked_counts)
    )
    onvgr_all = (
        pd.concat(all_onvgr)[stacked_onvgr] if all_onvgr else pd.DataFrame(columns=stacked_onvgr)
    )
    written.append(_write_csv(counts_all, out_dir / "counts_all.csv"))
    written.append(_write_csv(onvgr_all, out_dir / "onvgr_all.csv"))
    return written
