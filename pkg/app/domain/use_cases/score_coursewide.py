"""Score Course-wide Use Case - Retrospective baseline over the whole term"""
import logging

from app.domain.ports.activity_log_source import IActivityLogSource, Source
from app.domain.ports.report_store import IReportStore
from app.domain.schemas import CourseWideRun, PipelineOptions
from app.domain.services.coursewide_metric import coursewide_scores
from app.domain.services.sessionizer import compute_gap_threshold, sessionize_cohort
from app.domain.use_cases.prepare_course import prepare_course

logger = logging.getLogger(__name__)


class ScoreCourseWideUseCase:
    """Five-indicator course-wide score Y (and its IFD variant) after the course ends"""

    def __init__(self, log_source: IActivityLogSource, report_store: IReportStore | None = None):
        self.log_source = log_source
        self.report_store = report_store

    def execute(self, log: Source, grades: Source | None, options: PipelineOptions) -> CourseWideRun:
        """
        Execute the course-wide use case over every teaching week.

        Args:
            log: Activity log source
            grades: Grade sheet source (None retains every log user)
            options: Pipeline options

        Returns:
            CourseWideRun with one indicator row per retained student
        """
        course = prepare_course(self.log_source, log, grades, options)
        threshold = compute_gap_threshold(
            course.events,
            options.threshold_minutes,
            max_gap_minutes=options.max_gap_minutes,
            percentile=options.gap_percentile,
        )
        sessions = sessionize_cohort(course.events, threshold)
        indicators = coursewide_scores(
            sessions,
            course.cohort,
            weights=options.coursewide_weights,
            activity_key=options.activity_key,
        )

        run = CourseWideRun(
            threshold=threshold,
            cohort=course.cohort,
            excluded_users=course.excluded_users,
            weights=options.coursewide_weights,
            indicators=indicators,
        )
        if self.report_store is not None:
            self.report_store.save_coursewide(run)
        return run
