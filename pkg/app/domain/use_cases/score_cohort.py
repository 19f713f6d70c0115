"""Score Cohort Use Case - Weekly chapter-aligned engagement up to an as-of week"""
import logging

from app.domain.errors import ConfigError
from app.domain.ports.activity_log_source import IActivityLogSource, Source
from app.domain.ports.report_store import IReportStore
from app.domain.schemas import PipelineOptions, ScoreRun
from app.domain.services.chapter_metric import weekly_series
from app.domain.services.sessionizer import compute_gap_threshold, sessionize_cohort
from app.domain.use_cases.prepare_course import prepare_course

logger = logging.getLogger(__name__)


class ScoreCohortUseCase:
    """
    ScoreCohortUseCase: Computes y_t for weeks 1..as_of_week.

    Flow:
    1. Parse and label the log, apply grade exclusions
    2. Choose the inactivity threshold from events up to the as-of week
    3. Sessionize and attribute chapters
    4. Score every retained student week by week
    5. Persist the tables when a store is configured
    """

    def __init__(self, log_source: IActivityLogSource, report_store: IReportStore | None = None):
        self.log_source = log_source
        self.report_store = report_store

    def execute(
        self,
        log: Source,
        grades: Source | None,
        options: PipelineOptions,
        as_of_week: int,
    ) -> ScoreRun:
        """
        Execute the score use case.

        Args:
            log: Activity log source
            grades: Grade sheet source (None retains every log user)
            options: Pipeline options
            as_of_week: Last measurement week

        Returns:
            ScoreRun with sessions and weekly engagement

        Raises:
            ConfigError: as_of_week outside the calendar
            InputError: Unreadable or inconsistent inputs
        """
        if not 1 <= as_of_week <= options.calendar.num_weeks:
            raise ConfigError(f"as_of_week must be in [1, {options.calendar.num_weeks}], got {as_of_week}")

        course = prepare_course(self.log_source, log, grades, options)
        events = course.up_to(as_of_week)

        threshold = compute_gap_threshold(
            events,
            options.threshold_minutes,
            max_gap_minutes=options.max_gap_minutes,
            percentile=options.gap_percentile,
        )
        sessions = sessionize_cohort(events, threshold)
        engagement = weekly_series(
            sessions,
            course.cohort,
            range(1, as_of_week + 1),
            weights=options.chapter_weights,
            activity_key=options.activity_key,
        )

        run = ScoreRun(
            as_of_week=as_of_week,
            threshold=threshold,
            cohort=course.cohort,
            excluded_users=course.excluded_users,
            rejected_rows=course.rejected_rows,
            sessions=sessions,
            engagement=engagement,
        )
        if self.report_store is not None:
            self.report_store.save_score_run(run)
        return run
