"""Command-line entry point for the sensor-selection toolkit.

Exit codes: 0 success, 1 validation or parse error, 2 I/O error.
"""

import argparse
import sys
from collections.abc import Callable, Sequence
from pathlib import Path
from typing import Optional

from pydantic import ValidationError

from src.config.settings import settings
from src.models.errors import InvalidArgumentError, ResultsFormatError, SensorSelectionError
from src.models.ranking import Method, Selection
from src.services import harness, tables
from src.services.datagen import GeneratorConfig, generate, load_dataset, project_properties, save_dataset
from src.services.mcda import VikorParams, rank, vikor_compromise
from src.services.metrics import evaluate_selection
from src.services.pareto import fast_non_dominated_sort
from src.utils.logging import configure_logging, get_logger

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_IO = 2


class CLIArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that reports bad arguments as validation errors (exit code 1)."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise InvalidArgumentError(f"{self.prog}: {message}")


def _csv_of(kind: Callable[[str], object]) -> Callable[[str], list]:
    def parse(text: str) -> list:
        items = [item.strip() for item in text.split(",") if item.strip()]
        if not items:
            raise argparse.ArgumentTypeError(f"expected a comma-separated list, got {text!r}")
        try:
            return [kind(item) for item in items]
        except ValueError as e:
            raise argparse.ArgumentTypeError(str(e)) from e

    return parse


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise ValueError(f"seed {value} is not an unsigned 64-bit integer")
    return value


def _unit_interval(text: str) -> float:
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"v must be in [0, 1], got {value}")
    return value


def _props(text: str) -> int:
    value = int(text)
    if not 2 <= value <= 6:
        raise argparse.ArgumentTypeError(f"props must be in 2..6, got {value}")
    return value


def cmd_gen(args: argparse.Namespace) -> int:
    matrix = generate(GeneratorConfig(n_sensors=args.n, seed=args.seed))
    save_dataset(matrix, args.out)
    return EXIT_OK


def cmd_rank(args: argparse.Namespace) -> int:
    matrix = project_properties(load_dataset(args.data), args.props)
    if args.weights is not None:
        matrix = matrix.with_criteria(matrix.criteria.with_weights(args.weights))
    method = Method(args.method)
    if args.compromise_out is not None and method is not Method.VIKOR:
        raise InvalidArgumentError("--compromise-out requires --method vikor")
    vikor = VikorParams(v=args.v) if args.v is not None else VikorParams()

    ranking = rank(matrix, method, vikor)
    tables.write_ranking(ranking, matrix, args.out)

    if args.compromise_out is not None:
        tables.write_compromise(vikor_compromise(ranking), matrix, args.compromise_out)
    return EXIT_OK


def cmd_pareto(args: argparse.Namespace) -> int:
    matrix = project_properties(load_dataset(args.data), args.props)
    partition = fast_non_dominated_sort(matrix)
    tables.write_partition(partition, matrix, args.out)
    logger.info("Partition computed", fronts=partition.n_fronts, front_sizes=partition.front_sizes[:10])
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    ranked_ids = tables.read_ranked_ids(args.ranking)
    partition_ids, partition = tables.read_partition(args.partition)
    position = {option_id: i for i, option_id in enumerate(partition_ids)}
    if set(ranked_ids) != set(partition_ids):
        raise ResultsFormatError(
            f"Ranking {args.ranking} and partition {args.partition} cover different options"
        )
    if args.k < 1:
        raise InvalidArgumentError(f"k must be >= 1, got {args.k}")

    order = [position[option_id] for option_id in ranked_ids]
    selection = Selection(indices=frozenset(order[: args.k]), k=args.k)
    quality = evaluate_selection(selection, partition)
    tables.write_quality(quality, args.out)
    return EXIT_OK


def cmd_grid(args: argparse.Namespace) -> int:
    if args.n > settings.harness.desk_max_sensors and not args.full_scale:
        raise InvalidArgumentError(
            f"--n {args.n} exceeds the desk-scale limit of {settings.harness.desk_max_sensors}; "
            "pass --full-scale to run it"
        )
    spec = harness.GridSpec(
        n_sensors=args.n,
        methods=tuple(Method(m) for m in args.methods),
        ks=tuple(args.ks),
        property_counts=tuple(args.props),
        seeds=tuple(args.seeds),
        vikor_v=args.v if args.v is not None else settings.methods.vikor_v,
    )
    results = harness.run_grid(spec, args.out, args.data, max_workers=args.workers)
    if args.timings_out is not None:
        harness.write_timings(results, args.timings_out)
    return EXIT_OK


def cmd_plotdata(args: argparse.Namespace) -> int:
    harness.emit_plot_data(args.results, args.out)
    return EXIT_OK


def cmd_trends(args: argparse.Namespace) -> int:
    report = harness.check_trends(harness.read_results(args.results))
    frame = report.to_frame()
    if args.out is not None:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(args.out, index=False, encoding="utf-8", lineterminator="\n")
    else:
        sys.stdout.write(frame.to_csv(index=False, lineterminator="\n"))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = CLIArgumentParser(
        prog="sensor-mcda",
        description="Rank sensors with SAW/TOPSIS/VIKOR and score selections against Pareto fronts.",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=CLIArgumentParser)

    gen = sub.add_parser("gen", help="Generate a synthetic sensor dataset")
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--seed", type=_u64, required=True)
    gen.add_argument("--out", type=Path, required=True)
    gen.set_defaults(handler=cmd_gen)

    rank_cmd = sub.add_parser("rank", help="Rank a dataset with one MCDA method")
    rank_cmd.add_argument("--data", type=Path, required=True)
    rank_cmd.add_argument("--method", choices=[m.value for m in Method], required=True)
    rank_cmd.add_argument("--props", type=_props, required=True)
    rank_cmd.add_argument("--v", type=_unit_interval, default=None)
    rank_cmd.add_argument("--weights", type=_csv_of(float), default=None)
    rank_cmd.add_argument("--out", type=Path, required=True)
    rank_cmd.add_argument("--compromise-out", type=Path, default=None)
    rank_cmd.set_defaults(handler=cmd_rank)

    pareto = sub.add_parser("pareto", help="Sort a dataset into Pareto fronts")
    pareto.add_argument("--data", type=Path, required=True)
    pareto.add_argument("--props", type=_props, required=True)
    pareto.add_argument("--out", type=Path, required=True)
    pareto.set_defaults(handler=cmd_pareto)

    eval_cmd = sub.add_parser("eval", help="Score a top-k selection against a partition")
    eval_cmd.add_argument("--ranking", type=Path, required=True)
    eval_cmd.add_argument("--partition", type=Path, required=True)
    eval_cmd.add_argument("--k", type=int, required=True)
    eval_cmd.add_argument("--out", type=Path, required=True)
    eval_cmd.set_defaults(handler=cmd_eval)

    grid = sub.add_parser("grid", help="Run the full experiment grid")
    grid.add_argument("--n", type=int, required=True)
    grid.add_argument("--ks", type=_csv_of(int), required=True)
    grid.add_argument("--props", type=_csv_of(_props), required=True)
    grid.add_argument("--methods", type=_csv_of(Method), required=True)
    grid.add_argument("--seeds", type=_csv_of(_u64), required=True)
    grid.add_argument("--v", type=_unit_interval, default=None)
    grid.add_argument("--out", type=Path, required=True)
    grid.add_argument("--data", type=Path, default=None)
    grid.add_argument("--full-scale", action="store_true")
    grid.add_argument("--timings-out", type=Path, default=None)
    grid.add_argument("--workers", type=int, default=None)
    grid.set_defaults(handler=cmd_grid)

    plot = sub.add_parser("plotdata", help="Write per-figure CSVs from results.csv")
    plot.add_argument("--results", type=Path, required=True)
    plot.add_argument("--out", type=Path, required=True)
    plot.set_defaults(handler=cmd_plotdata)

    trends = sub.add_parser("trends", help="Check selection-quality trends in results.csv")
    trends.add_argument("--results", type=Path, required=True)
    trends.add_argument("--out", type=Path, default=None)
    trends.set_defaults(handler=cmd_trends)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one subcommand and return its exit code."""
    configure_logging()
    try:
        args = build_parser().parse_args(argv)
        return args.handler(args)
    except (SensorSelectionError, ValidationError) as e:
        logger.error("Command failed", error=str(e), error_type=type(e).__name__)
        return EXIT_INVALID
    except OSError as e:
        logger.error("I/O error", error=str(e), error_type=type(e).__name__)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
