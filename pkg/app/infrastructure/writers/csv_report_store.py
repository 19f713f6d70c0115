"""CSV Report Store - pandas/pydantic implementation of IReportStore"""
import logging
from collections import Counter
from pathlib import Path

import pandas as pd

from app.domain.ports.report_store import IReportStore
from app.domain.schemas import (
    ChapterRelease,
    ColumnMapping,
    CourseCalendar,
    CourseWideIndicators,
    CourseWideRun,
    EngagementSeries,
    EvaluationReport,
    ScoreManifest,
    ScoreRun,
    SimulatedCohort,
    SimulationConfig,
    SimulationManifest,
    WeeklyEngagement,
)
from app.domain.services.sessionizer import session_table

logger = logging.getLogger(__name__)

SCORES_FILE = "scores.csv"
INDICATORS_FILE = "indicators.csv"
SESSIONS_FILE = "sessions.csv"
SCORE_MANIFEST_FILE = "score_manifest.json"
COURSEWIDE_FILE = "coursewide.csv"
REPORT_FILE = "report.json"
ALIGNMENT_FILE = "alignment.csv"
GRADE_RHO_FILE = "grade_correlation.csv"
QUINTILES_FILE = "quintiles.csv"
CLASSIFICATION_FILE = "classification.csv"
LOG_FILE = "log.csv"
GRADES_FILE = "grades.csv"
LATENT_FILE = "latent_engagement.csv"
SIMULATION_MANIFEST_FILE = "simulation_manifest.json"

INDICATOR_COLUMNS = ["immediacy", "frequency", "diversity", "recency", "interval"]


class CsvReportStore(IReportStore):
    """
    Writes every artifact of a run into one output directory.

    Tables are CSV with "\\n" line endings and full float precision; metadata
    is pretty-printed pydantic JSON. Rows are always sorted before writing.
    """

    def __init__(
        self,
        output_dir: str | Path,
        columns: ColumnMapping | None = None,
        timestamp_format: str = "%Y-%m-%d %H:%M",
        delimiter: str = ",",
    ):
        """
        Initialize the store.

        Args:
            output_dir: Directory receiving the artifacts (created on first write)
            columns: Header names used when writing a simulated log
            timestamp_format: strftime pattern of simulated log timestamps
            delimiter: Separator of the simulated log
        """
        self.output_dir = Path(output_dir)
        self.columns = columns or ColumnMapping()
        self.timestamp_format = timestamp_format
        self.delimiter = delimiter

    def _path(self, name: str) -> Path:
        return self.output_dir / name

    def _write_csv(self, frame: pd.DataFrame, name: str, sep: str = ",") -> Path:
        self.output_dir.mkdir(parents=True, exist_ok=True)
        path = self._path(name)
        frame.to_csv(path, index=False, sep=sep, lineterminator="\n")
        return path

    def _write_json(self, payload: str, name: str) -> Path:
        self.output_dir.mkdir(parents=True, exist_ok=True)
        path = self._path(name)
        path.write_text(payload + "\n", encoding="utf-8")
        return path

    # --- score runs ---------------------------------------------------------

    def save_score_run(self, run: ScoreRun) -> list[Path]:
        engagement = run.engagement
        chapters = sorted(r.chapter for r in engagement.releases)

        rows = []
        for series in sorted(engagement.series, key=lambda s: s.user):
            for week in engagement.weeks:
                row = {"user": series.user, "week": week, "y_t": series.scores[week]}
                idf = series.idf.get(week, {})
                for chapter in chapters:
                    row[f"idf_ch{chapter}"] = idf.get(chapter, 0.0)
                rows.append(row)
        scores = pd.DataFrame(rows, columns=["user", "week", "y_t"] + [f"idf_ch{k}" for k in chapters])

        indicators = pd.DataFrame(
            [row.model_dump() for row in engagement.indicators],
            columns=[
                "user", "chapter", "week",
                "raw_frequency", "raw_immediacy", "raw_diversity",
                "frequency", "immediacy", "diversity", "idf",
            ],
        ).sort_values(["week", "chapter", "user"], kind="mergesort")

        sessions = pd.DataFrame(
            session_table(run.sessions),
            columns=["user", "session_index", "chapter", "week", "start_day_offset", "n_events"],
        )

        weights = run.engagement.series[0].weights if run.engagement.series else []
        manifest = ScoreManifest(
            as_of_week=run.as_of_week,
            weeks=engagement.weeks,
            threshold=run.threshold,
            cohort_size=len(run.cohort),
            excluded_users=len(run.excluded_users),
            rejected_rows=run.rejected_rows,
            sessions=len(run.sessions),
            general_only_sessions=sum(1 for s in run.sessions if s.excluded_from_metrics),
            weights=weights,
            releases=engagement.releases,
        )

        paths = [
            self._write_csv(scores, SCORES_FILE),
            self._write_csv(indicators, INDICATORS_FILE),
            self._write_csv(sessions, SESSIONS_FILE),
            self._write_json(manifest.model_dump_json(indent=2), SCORE_MANIFEST_FILE),
        ]
        logger.info(f"✓ Wrote weekly scores for {len(run.cohort)} students to {self.output_dir}")
        return paths

    def load_weekly_scores(self) -> WeeklyEngagement:
        frame = pd.read_csv(self._path(SCORES_FILE), dtype={"user": str}, keep_default_na=False)
        idf_columns = [c for c in frame.columns if c.startswith("idf_ch")]

        series: dict[str, EngagementSeries] = {}
        for record in frame.to_dict("records"):
            entry = series.setdefault(record["user"], EngagementSeries(user=record["user"]))
            week = int(record["week"])
            entry.scores[week] = float(record["y_t"])
            entry.idf[week] = {
                int(column.removeprefix("idf_ch")): float(record[column])
                for column in idf_columns
                if float(record[column]) > 0
            }

        releases: list[ChapterRelease] = []
        manifest_path = self._path(SCORE_MANIFEST_FILE)
        if manifest_path.exists():
            manifest = ScoreManifest.model_validate_json(manifest_path.read_text(encoding="utf-8"))
            releases = manifest.releases
            for entry in series.values():
                entry.weights = manifest.weights

        weeks = sorted({int(w) for w in frame["week"]})
        logger.info(f"✓ Loaded weekly scores for {len(series)} students ({len(weeks)} weeks)")
        return WeeklyEngagement(weeks=weeks, series=[series[u] for u in sorted(series)], releases=releases)

    # --- course-wide --------------------------------------------------------

    def save_coursewide(self, run: CourseWideRun) -> list[Path]:
        rows = []
        for row in sorted(run.indicators, key=lambda r: r.user):
            record = {"user": row.user}
            for name in INDICATOR_COLUMNS:
                record[f"raw_{name}"] = getattr(row, f"raw_{name}")
            for name in INDICATOR_COLUMNS:
                record[name] = getattr(row, name)
            record["Y"] = row.score
            record["Y_ifd"] = row.score_ifd
            rows.append(record)

        columns = ["user"] + [f"raw_{n}" for n in INDICATOR_COLUMNS] + INDICATOR_COLUMNS + ["Y", "Y_ifd"]
        frame = pd.DataFrame(rows, columns=columns)
        for name in INDICATOR_COLUMNS:
            frame[f"raw_{name}"] = frame[f"raw_{name}"].astype("Int64")

        path = self._write_csv(frame, COURSEWIDE_FILE)
        logger.info(f"✓ Wrote course-wide scores for {len(rows)} students to {path}")
        return [path]

    def load_coursewide(self) -> list[CourseWideIndicators]:
        # only an empty raw indicator cell is missing; ids like "NA" stay strings
        frame = pd.read_csv(
            self._path(COURSEWIDE_FILE),
            dtype={"user": str},
            keep_default_na=False,
            na_values={f"raw_{name}": [""] for name in INDICATOR_COLUMNS},
        )
        rows = []
        for record in frame.to_dict("records"):
            raw = {
                f"raw_{name}": None if pd.isna(record[f"raw_{name}"]) else int(record[f"raw_{name}"])
                for name in INDICATOR_COLUMNS
            }
            rows.append(
                CourseWideIndicators(
                    user=record["user"],
                    **raw,
                    **{name: float(record[name]) for name in INDICATOR_COLUMNS},
                    score=float(record["Y"]),
                    score_ifd=float(record["Y_ifd"]),
                )
            )
        return rows

    # --- evaluation ---------------------------------------------------------

    def save_report(self, report: EvaluationReport) -> list[Path]:
        ifd = {point.week: point.rho for point in report.alignment_ifd}
        alignment = pd.DataFrame(
            [{"week": p.week, "rho": p.rho, "rho_ifd": ifd.get(p.week)} for p in report.alignment],
            columns=["week", "rho", "rho_ifd"],
        )
        grade_rho = pd.DataFrame(
            [
                {"week": p.week, "rho": p.rho, "coursewide_rho": report.coursewide_grade_rho}
                for p in report.grade_correlation
            ],
            columns=["week", "rho", "coursewide_rho"],
        )
        quintiles = pd.DataFrame(
            [s.model_dump(mode="json") for s in report.quintile_summaries],
            columns=list(report.quintile_summaries[0].model_dump()) if report.quintile_summaries else ["week"],
        )

        classification_rows = []
        for scope, entries in (("weekly", report.classification), ("coursewide", report.coursewide_classification)):
            for entry in entries:
                counts = entry.counts
                classification_rows.append(
                    {
                        "scope": scope,
                        "week": entry.week,
                        "threshold": entry.threshold,
                        "auc": entry.auc,
                        "flagged": counts.flagged,
                        "true_positive": counts.true_positive,
                        "false_positive": counts.false_positive,
                        "false_negative": counts.false_negative,
                        "positives_total": counts.positives_total,
                        "recall": counts.recall,
                        "precision": counts.precision,
                    }
                )
        classification = pd.DataFrame(classification_rows)
        if not classification.empty:
            classification["week"] = classification["week"].astype("Int64")

        paths = [
            self._write_json(report.model_dump_json(indent=2), REPORT_FILE),
            self._write_csv(alignment, ALIGNMENT_FILE),
            self._write_csv(grade_rho, GRADE_RHO_FILE),
            self._write_csv(quintiles, QUINTILES_FILE),
            self._write_csv(classification, CLASSIFICATION_FILE),
        ]
        logger.info(f"✓ Wrote evaluation report to {self.output_dir}")
        return paths

    def load_report(self) -> EvaluationReport:
        return EvaluationReport.model_validate_json(self._path(REPORT_FILE).read_text(encoding="utf-8"))

    # --- simulation ---------------------------------------------------------

    def save_simulation(
        self,
        cohort: SimulatedCohort,
        config: SimulationConfig,
        calendar: CourseCalendar,
    ) -> list[Path]:
        c = self.columns
        log = pd.DataFrame(
            [
                {
                    c.time: event.time.strftime(self.timestamp_format),
                    c.user: event.user,
                    c.event_context: event.event_context,
                    c.component: event.component,
                    c.event_name: event.event_name,
                    c.description: event.description,
                }
                for event in cohort.events
            ],
            columns=[c.time, c.user, c.event_context, c.component, c.event_name, c.description],
        )
        grades = pd.DataFrame(
            [{"user": g.user, "final_grade": g.final_grade} for g in cohort.grades],
            columns=["user", "final_grade"],
        )
        latent = pd.DataFrame(
            [
                {"user": user, "archetype": cohort.archetype_of[user], "latent_engagement": value}
                for user, value in sorted(cohort.latent.items())
            ],
            columns=["user", "archetype", "latent_engagement"],
        )
        manifest = SimulationManifest(
            seed=config.seed,
            cohort_size=len(cohort.grades),
            events=len(cohort.events),
            excluded_users=sum(1 for g in cohort.grades if g.excluded),
            archetype_counts=dict(sorted(Counter(cohort.archetype_of.values()).items())),
            calendar=calendar,
            config=config,
        )

        paths = [
            self._write_csv(log, LOG_FILE, sep=self.delimiter),
            self._write_csv(grades, GRADES_FILE),
            self._write_csv(latent, LATENT_FILE),
            self._write_json(manifest.model_dump_json(indent=2), SIMULATION_MANIFEST_FILE),
        ]
        logger.info(f"✓ Wrote simulated cohort ({len(cohort.events)} events) to {self.output_dir}")
        return paths
