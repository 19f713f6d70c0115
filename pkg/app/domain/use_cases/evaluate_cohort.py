"""Evaluate Cohort Use Case - Compare weekly scores with the baseline and grades"""
import logging
from collections.abc import Sequence

from app.domain.errors import CohortMismatch
from app.domain.ports.activity_log_source import IActivityLogSource, Source
from app.domain.ports.report_store import IReportStore
from app.domain.schemas import (
    CourseWideIndicators,
    EvaluationReport,
    EvaluationSettings,
    GradeRecord,
    WeeklyEngagement,
)
from app.domain.services.evaluation import evaluate_cohort
from app.domain.services.ingest import apply_exclusions

logger = logging.getLogger(__name__)


class EvaluateCohortUseCase:
    """
    EvaluateCohortUseCase: Builds the EvaluationReport.

    execute() reads the stored score tables and writes the report back;
    evaluate() works on in-memory results.
    """

    def __init__(self, log_source: IActivityLogSource, report_store: IReportStore | None = None):
        self.log_source = log_source
        self.report_store = report_store

    def evaluate(
        self,
        engagement: WeeklyEngagement,
        coursewide: Sequence[CourseWideIndicators],
        grades: Sequence[GradeRecord],
        settings: EvaluationSettings,
    ) -> EvaluationReport:
        """
        Evaluate in-memory scores.

        Raises:
            CohortMismatch: A scored student has no usable grade
        """
        retained, excluded = apply_exclusions(grades)
        scored = {s.user for s in engagement.series}
        dropped = sorted(scored & excluded)
        if dropped:
            raise CohortMismatch(dropped, "scored students excluded by a zero grade; score with the grades file")

        grade_map = {r.user: r.final_grade for r in retained}
        return evaluate_cohort(engagement, coursewide, grade_map, settings)

    def execute(self, grades: Source, settings: EvaluationSettings, delimiter: str = ",") -> EvaluationReport:
        """
        Evaluate the stored score tables against a grade sheet.

        Args:
            grades: Grade sheet source
            settings: Grade thresholds and alignment benchmark
            delimiter: Grade sheet separator

        Raises:
            MissingGrades: Grade sheet not found
            FileNotFoundError: Score tables not written yet
        """
        if self.report_store is None:
            raise RuntimeError("EvaluateCohortUseCase.execute needs a report store")

        engagement = self.report_store.load_weekly_scores()
        coursewide = self.report_store.load_coursewide()
        records = self.log_source.read_grades(grades, delimiter=delimiter)

        report = self.evaluate(engagement, coursewide, records, settings)
        self.report_store.save_report(report)
        return report
