"""Ingest Service - Calendar/chapter labelling and grade exclusions"""
import logging
import re
from collections.abc import Iterable

from app.domain.errors import DuplicateUser
from app.domain.schemas import ChapterRules, CourseCalendar, GradeRecord, LabeledEvent, LogEvent

logger = logging.getLogger(__name__)

GENERAL = "General"
EXCLUDED = "Excluded"


class ChapterLabeler:
    """
    Resolves the chapter label of a resource.

    Order: manual override, general marker on the component, numeric pattern
    on the title, otherwise General.
    """

    def __init__(self, rules: ChapterRules):
        self.rules = rules
        self._pattern = re.compile(rules.numeric_pattern)
        self._markers = [m.casefold() for m in rules.general_markers]

    def label(self, event: LogEvent) -> int | str:
        """
        Get the label of one event.

        Returns:
            A chapter number, "General" or "Excluded"
        """
        title = getattr(event, self.rules.title_field)

        if title in self.rules.overrides:
            return self.rules.overrides[title]

        component = event.component.casefold()
        if any(marker in component for marker in self._markers):
            return GENERAL

        match = self._pattern.search(title)
        if match is None:
            return GENERAL
        captured = match.group(1)
        # only a positive chapter number labels a chapter
        if captured is None or not captured.isdecimal() or int(captured) < 1:
            return GENERAL
        return int(captured)


def label_events(
    events: Iterable[LogEvent],
    calendar: CourseCalendar,
    rules: ChapterRules,
) -> list[LabeledEvent]:
    """
    Place events in the teaching calendar and attach chapter labels.

    Events outside the teaching weeks, and events whose override is
    "Excluded", are dropped. Every retained event carries a chapter number
    or General (chapter None).

    Args:
        events: Time-sorted log events
        calendar: Course calendar
        rules: Chapter labelling rules

    Returns:
        Labeled events in input order
    """
    labeler = ChapterLabeler(rules)
    labeled: list[LabeledEvent] = []
    out_of_term = 0
    excluded = 0

    for event in events:
        day_offset = calendar.day_offset(event.time)
        if not calendar.in_term(day_offset):
            out_of_term += 1
            continue

        label = labeler.label(event)
        if label == EXCLUDED:
            excluded += 1
            continue

        labeled.append(
            LabeledEvent(
                event=event,
                week=calendar.week_of(day_offset),
                day_offset=day_offset,
                chapter=None if label == GENERAL else label,
            )
        )

    if out_of_term or excluded:
        logger.info(
            f"Dropped {out_of_term} events outside the teaching weeks and {excluded} excluded by override"
        )
    logger.debug(f"Labeled {len(labeled)} events")
    return labeled


def apply_exclusions(grades: Iterable[GradeRecord]) -> tuple[list[GradeRecord], set[str]]:
    """
    Split grade records into the retained cohort and the excluded users.

    A zero final (or exam) grade marks an absence rather than a failure, so
    those students leave every downstream population.

    Raises:
        DuplicateUser: Same user recorded with conflicting grades
    """
    by_user: dict[str, GradeRecord] = {}
    for record in grades:
        seen = by_user.get(record.user)
        if seen is None:
            by_user[record.user] = record
        elif seen != record:
            raise DuplicateUser(
                record.user,
                ((seen.final_grade, seen.exam_grade), (record.final_grade, record.exam_grade)),
            )

    retained = [r for r in by_user.values() if not r.excluded]
    excluded_users = {r.user for r in by_user.values() if r.excluded}

    if excluded_users:
        logger.info(f"Excluded {len(excluded_users)} students with a zero final or exam grade")
    return retained, excluded_users
