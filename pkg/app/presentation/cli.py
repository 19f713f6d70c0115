"""Command Line Interface - simulate, score, score-coursewide, evaluate and report"""
import argparse
import logging
import sys
from pathlib import Path

import pandas as pd
from pydantic import ValidationError

from app.config import RunConfig, load_run_config, settings
from app.di import ServiceContainer
from app.domain.errors import EngagementError
from app.domain.schemas import EvaluationReport
from app.infrastructure.readers.csv_log_reader import CsvActivityLogSource
from app.infrastructure.writers.csv_report_store import CsvReportStore

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_CONFIG = 2
EXIT_INTERNAL = 3


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="Path to the JSON run configuration.")
    common.add_argument("--out", type=Path, help="Output directory (overrides output_dir).")
    common.add_argument("--as-of-week", type=int, help="Last measurement week (default: last teaching week).")
    common.add_argument("--seed", type=int, help="Simulation seed (simulate only).")
    common.add_argument(
        "--threshold-minutes",
        type=float,
        help="Pin the inactivity threshold instead of computing it from the log.",
    )

    parser = argparse.ArgumentParser(
        prog="engagement",
        description="Chapter-aligned weekly engagement from VLE activity logs.",
    )
    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser("simulate", parents=[common], help="Write a seeded synthetic cohort (log, grades).")
    commands.add_parser("score", parents=[common], help="Weekly chapter-aligned scores up to the as-of week.")
    commands.add_parser("score-coursewide", parents=[common], help="Retrospective course-wide scores.")
    commands.add_parser("evaluate", parents=[common], help="Compare stored scores with grades.")
    commands.add_parser("report", parents=[common], help="Print a summary of the stored evaluation report.")
    return parser


def _container(config: RunConfig) -> ServiceContainer:
    store = CsvReportStore(
        config.output_dir,
        columns=config.columns,
        timestamp_format=config.timestamp_format,
        delimiter=config.delimiter,
    )
    return ServiceContainer(log_source=CsvActivityLogSource(), report_store=store)


def _optional_grades(config: RunConfig) -> Path | None:
    path = config.resolved_grades_path
    if path.exists():
        return path
    logger.warning(f"⚠️ No grade sheet at {path}; scoring every user in the log")
    return None


def _fmt(value: float | None) -> str:
    return "-" if value is None else f"{value:.3f}"


def render_report(report: EvaluationReport) -> str:
    """Plain-text summary of an evaluation report"""
    cohort = report.cohort
    lines = [
        f"Cohort: {cohort.total} students, mean grade {_fmt(cohort.mean_grade)}",
        f"  below 40: {cohort.below_fail} ({_fmt(cohort.share_below_fail)})",
        f"  below 50: {cohort.below_low} ({_fmt(cohort.share_below_low)})",
        "",
    ]

    rows: dict[int, dict[str, str]] = {}
    for point in report.alignment:
        rows.setdefault(point.week, {})["align"] = _fmt(point.rho)
    for point in report.alignment_ifd:
        rows.setdefault(point.week, {})["align_ifd"] = _fmt(point.rho)
    for point in report.grade_correlation:
        rows.setdefault(point.week, {})["grade_rho"] = _fmt(point.rho)
    for entry in report.classification:
        suffix = f"<{entry.threshold:g}"
        row = rows.setdefault(entry.week, {})
        row[f"auc{suffix}"] = _fmt(entry.auc)
        row[f"recall{suffix}"] = _fmt(entry.counts.recall)
        row[f"precision{suffix}"] = _fmt(entry.counts.precision)

    table = pd.DataFrame.from_dict(rows, orient="index").sort_index()
    table.index.name = "week"
    lines.append(table.to_string())
    lines.append("")
    lines.append(f"Course-wide grade rho: {_fmt(report.coursewide_grade_rho)}")
    for entry in report.coursewide_classification:
        lines.append(
            f"Course-wide <{entry.threshold:g}: AUC {_fmt(entry.auc)}, "
            f"recall {_fmt(entry.counts.recall)}, precision {_fmt(entry.counts.precision)}"
        )
    milestones = report.milestones
    lines.append(f"Strong alignment from week: {milestones.strong_alignment_week or '-'}")
    lines.append(f"Grade rho matches course-wide from week: {milestones.grade_crossover_week or '-'}")
    return "\n".join(lines)


def run(args: argparse.Namespace) -> int:
    config = load_run_config(args.config).with_overrides(
        output_dir=args.out,
        as_of_week=args.as_of_week,
        threshold_minutes=args.threshold_minutes,
        seed=args.seed,
    )
    container = _container(config)

    if args.command == "simulate":
        cohort = container.get_simulate_cohort_use_case().execute(config.calendar, config.simulation)
        logger.info(f"✓ simulate: {len(cohort.events)} events for {len(cohort.grades)} students")

    elif args.command == "score":
        result = container.get_score_cohort_use_case().execute(
            config.resolved_log_path,
            _optional_grades(config),
            config,
            config.final_week,
        )
        logger.info(f"✓ score: {len(result.cohort)} students up to week {result.as_of_week}")

    elif args.command == "score-coursewide":
        result = container.get_score_coursewide_use_case().execute(
            config.resolved_log_path,
            _optional_grades(config),
            config,
        )
        logger.info(f"✓ score-coursewide: {len(result.cohort)} students")

    elif args.command == "evaluate":
        report = container.get_evaluate_cohort_use_case().execute(
            config.resolved_grades_path,
            config.evaluation,
            delimiter=config.delimiter,
        )
        logger.info(f"✓ evaluate: {report.cohort.total} students over {len(report.weeks)} weeks")

    elif args.command == "report":
        report = CsvReportStore(config.output_dir).load_report()
        sys.stdout.write(render_report(report) + "\n")

    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    """
    CLI entry point.

    Returns:
        0 on success, 1 input error, 2 config error, 3 internal error
    """
    logging.basicConfig(
        level=settings.LOG_LEVEL,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )
    args = build_parser().parse_args(argv)

    try:
        return run(args)
    except EngagementError as e:
        logger.error(f"✗ {e}")
        return e.exit_code
    except ValidationError as e:
        logger.error(f"✗ Invalid configuration: {e}")
        return EXIT_CONFIG
    except FileNotFoundError as e:
        logger.error(f"✗ {e}")
        return EXIT_INPUT
    except Exception as e:
        logger.exception(f"✗ Unexpected failure: {e}")
        return EXIT_INTERNAL
