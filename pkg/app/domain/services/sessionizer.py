"""Sessionizer Service - Study sessions from labeled VLE events"""
import logging
from collections.abc import Iterable, Sequence
from itertools import groupby

import numpy as np

from app.domain.errors import InsufficientData
from app.domain.schemas import GapThreshold, LabeledEvent, Session, ThresholdSource

logger = logging.getLogger(__name__)

MAX_GAP_MINUTES = 120.0
GAP_PERCENTILE = 95


def _gap_minutes(earlier: LabeledEvent, later: LabeledEvent) -> float:
    return (later.time - earlier.time).total_seconds() / 60.0


def _by_user(events: Iterable[LabeledEvent]) -> dict[str, list[LabeledEvent]]:
    # stable: keeps input (time) order within each user
    streams: dict[str, list[LabeledEvent]] = {}
    for event in events:
        streams.setdefault(event.user, []).append(event)
    return streams


def compute_gap_threshold(
    events: Iterable[LabeledEvent],
    configured_minutes: float | None = None,
    max_gap_minutes: float = MAX_GAP_MINUTES,
    percentile: int = GAP_PERCENTILE,
) -> GapThreshold:
    """
    Inactivity threshold separating study sessions.

    Collects the positive gaps between consecutive events of each user,
    drops gaps above max_gap_minutes and takes the nearest-rank percentile
    (the value at 1-based index ceil(p*n/100) of the sorted sample).

    Args:
        events: Time-sorted events of a course up to the measurement week
        configured_minutes: Pinned threshold; returned unchanged when given
        max_gap_minutes: Upper bound of the gap sample window
        percentile: Percentile of the gap sample

    Raises:
        InsufficientData: No eligible gaps and no configured threshold
    """
    if configured_minutes is not None:
        return GapThreshold(minutes=configured_minutes, source=ThresholdSource.CONFIGURED)

    gaps: list[float] = []
    for stream in _by_user(events).values():
        gaps.extend(_gap_minutes(a, b) for a, b in zip(stream, stream[1:]))

    sample = np.sort(np.asarray(gaps, dtype=float))
    sample = sample[(sample > 0) & (sample <= max_gap_minutes)]
    if sample.size == 0:
        raise InsufficientData(
            "no positive inactivity gaps within the sample window; supply a configured threshold "
            "(--threshold-minutes)"
        )

    rank = -(-percentile * sample.size // 100)
    minutes = float(sample[rank - 1])
    logger.info(f"✓ Inactivity threshold {minutes:g} min from {sample.size} gaps (p{percentile})")
    return GapThreshold(minutes=minutes, source=ThresholdSource.COMPUTED, sample_size=int(sample.size))


def split_by_inactivity(events: Sequence[LabeledEvent], threshold: GapThreshold) -> list[list[LabeledEvent]]:
    """
    Split one user's time-sorted events at every gap longer than the threshold.

    Returns:
        Raw sessions in time order; every event belongs to exactly one
    """
    sessions: list[list[LabeledEvent]] = []
    current: list[LabeledEvent] = []
    for event in events:
        if current and _gap_minutes(current[-1], event) > threshold.minutes:
            sessions.append(current)
            current = []
        current.append(event)
    if current:
        sessions.append(current)
    return sessions


def _make_session(events: list[LabeledEvent], chapter: int | None) -> Session:
    first = events[0]
    return Session(
        user=first.user,
        events=events,
        start_day_offset=first.day_offset,
        week=first.week,
        chapter=chapter,
    )


def attribute_chapter_sessions(raw_sessions: Iterable[Sequence[LabeledEvent]]) -> list[Session]:
    """
    Attribute raw sessions to chapters.

    The first chapter-labeled event fixes the chapter; an event of a
    different chapter closes the session and opens a new one. General events
    inherit the current chapter, and a General prefix joins the first chapter
    that appears. A raw session with no chapter event becomes one GeneralOnly
    session (chapter None).
    """
    sessions: list[Session] = []
    for raw in raw_sessions:
        current: list[LabeledEvent] = []
        chapter: int | None = None
        for event in raw:
            if event.chapter is None or event.chapter == chapter:
                current.append(event)
            elif chapter is None:
                chapter = event.chapter
                current.append(event)
            else:
                sessions.append(_make_session(current, chapter))
                current = [event]
                chapter = event.chapter
        if current:
            sessions.append(_make_session(current, chapter))
    return sessions


def sessionize_cohort(events: Iterable[LabeledEvent], threshold: GapThreshold) -> list[Session]:
    """
    Sessionize every user of a course.

    Args:
        events: Time-sorted labeled events of many users
        threshold: Course-level inactivity threshold

    Returns:
        Sessions ordered by user, then time
    """
    sessions: list[Session] = []
    for user, stream in sorted(_by_user(events).items()):
        sessions.extend(attribute_chapter_sessions(split_by_inactivity(stream, threshold)))

    general_only = sum(1 for s in sessions if s.excluded_from_metrics)
    logger.info(
        f"✓ Built {len(sessions)} sessions ({general_only} general-only) at {threshold.minutes:g} min"
    )
    return sessions


def session_table(sessions: Iterable[Session]) -> list[dict]:
    """Rows of the session dump (user, session_index, chapter, week, start_day_offset, n_events)"""
    rows: list[dict] = []
    for user, group in groupby(sessions, key=lambda s: s.user):
        for index, session in enumerate(group, start=1):
            rows.append(
                {
                    "user": user,
                    "session_index": index,
                    "chapter": "GeneralOnly" if session.chapter is None else str(session.chapter),
                    "week": session.week,
                    "start_day_offset": session.start_day_offset,
                    "n_events": session.n_events,
                }
            )
    return rows
