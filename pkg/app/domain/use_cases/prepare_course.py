"""Course Preparation - Shared ingest step of the score and course-wide use cases"""
import logging
from dataclasses import dataclass, field

from app.domain.ports.activity_log_source import IActivityLogSource, Source
from app.domain.schemas import LabeledEvent, PipelineOptions
from app.domain.services.ingest import apply_exclusions, label_events

logger = logging.getLogger(__name__)


@dataclass
class PreparedCourse:
    """Labeled events of the retained cohort"""

    events: list[LabeledEvent]
    cohort: list[str]
    excluded_users: list[str] = field(default_factory=list)
    rejected_rows: int = 0

    def up_to(self, week: int) -> list[LabeledEvent]:
        return [e for e in self.events if e.week <= week]


def prepare_course(
    log_source: IActivityLogSource,
    log: Source,
    grades: Source | None,
    options: PipelineOptions,
) -> PreparedCourse:
    """
    Parse, label and restrict a course log to its retained cohort.

    With a grade sheet the cohort is the set of graded students without a
    zero grade, and log activity of anyone else is dropped. Without one
    every user in the log is retained.

    Args:
        log_source: Reader implementation
        log: Activity log source
        grades: Grade sheet source, or None
        options: Parsing, calendar and labelling options
    """
    parsed = log_source.parse_log(
        log,
        options.columns,
        options.timestamp_format,
        delimiter=options.delimiter,
        strict=options.strict,
    )
    labeled = label_events(parsed.events, options.calendar, options.rules)

    if grades is None:
        cohort = sorted({e.user for e in labeled})
        logger.info(f"No grade sheet: retaining all {len(cohort)} users seen in the log")
        return PreparedCourse(events=labeled, cohort=cohort, rejected_rows=len(parsed.rejected))

    retained, excluded = apply_exclusions(log_source.read_grades(grades, delimiter=options.delimiter))
    cohort = sorted(r.user for r in retained)
    members = set(cohort)

    ungraded = sorted({e.user for e in labeled} - members - excluded)
    if ungraded:
        logger.warning(f"⚠️ Dropping {len(ungraded)} log users without a grade record")

    return PreparedCourse(
        events=[e for e in labeled if e.user in members],
        cohort=cohort,
        excluded_users=sorted(excluded),
        rejected_rows=len(parsed.rejected),
    )
