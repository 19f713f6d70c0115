"""Course-wide Metric Service - Retrospective five-indicator engagement baseline"""
import logging
from collections.abc import Iterable, Sequence

from app.domain.errors import EmptySubset
from app.domain.schemas import (
    ALL_INDICATORS,
    IFD_INDICATORS,
    CourseWideIndicators,
    CourseWideWeights,
    Indicator,
    Session,
)
from app.domain.services.chapter_metric import DEFAULT_ACTIVITY_KEY, minmax_scale

logger = logging.getLogger(__name__)


def coursewide_indicators(
    user: str,
    sessions: Sequence[Session],
    activity_key: tuple[str, ...] = DEFAULT_ACTIVITY_KEY,
) -> CourseWideIndicators:
    """
    Raw course-wide indicators of one student over every session of the course.

    GeneralOnly sessions count here; the course-wide metric ignores chapter
    structure. A student without sessions gets F = D = 0 and no day-based values.
    """
    if not sessions:
        return CourseWideIndicators(user=user)

    days = [s.start_day_offset for s in sessions]
    activities: set[tuple[str, ...]] = set()
    for session in sessions:
        activities |= session.activities(activity_key)

    first, last = min(days), max(days)
    return CourseWideIndicators(
        user=user,
        raw_immediacy=-first,
        raw_frequency=len(sessions),
        raw_diversity=len(activities),
        raw_recency=last,
        raw_interval=last - first,
    )


def coursewide_score(
    scaled: CourseWideIndicators,
    weights: CourseWideWeights | None = None,
) -> float:
    """Weighted sum of the five scaled indicators"""
    return coursewide_variant(scaled, ALL_INDICATORS, weights)


def coursewide_variant(
    scaled: CourseWideIndicators,
    indicators: Iterable[Indicator],
    weights: CourseWideWeights | None = None,
) -> float:
    """
    Course-wide score restricted to a subset of indicators.

    Terms are added in the fixed Immediacy, Frequency, Diversity, Recency,
    Interval order whatever order the subset is given in.

    Raises:
        EmptySubset: No indicator selected
    """
    chosen = set(indicators)
    if not chosen:
        raise EmptySubset("course-wide variant needs at least one indicator")

    weights = weights or CourseWideWeights()
    total = 0.0
    for indicator in ALL_INDICATORS:
        if indicator in chosen:
            total += weights.weight(indicator) * scaled.scaled(indicator)
    return total


def coursewide_scores(
    sessions: Iterable[Session],
    cohort: Iterable[str],
    weights: CourseWideWeights | None = None,
    activity_key: tuple[str, ...] = DEFAULT_ACTIVITY_KEY,
) -> list[CourseWideIndicators]:
    """
    Raw, scaled and combined course-wide indicators of a retained cohort.

    Scaling runs over the students with at least one session; students
    without sessions keep every scaled indicator at 0.

    Returns:
        One row per cohort member, sorted by user
    """
    weights = weights or CourseWideWeights()
    members = sorted(set(cohort))
    by_user: dict[str, list[Session]] = {user: [] for user in members}
    for session in sessions:
        if session.user in by_user:
            by_user[session.user].append(session)

    raw = [coursewide_indicators(user, by_user[user], activity_key) for user in members]
    active = [row for row in raw if row.raw_frequency > 0]

    scaled_columns: dict[Indicator, list[float]] = {}
    if active:
        for indicator in ALL_INDICATORS:
            scaled_columns[indicator] = list(minmax_scale([row.raw(indicator) for row in active]))

    position = {row.user: j for j, row in enumerate(active)}
    results: list[CourseWideIndicators] = []
    for row in raw:
        j = position.get(row.user)
        if j is not None:
            row = row.model_copy(
                update={indicator.value: float(scaled_columns[indicator][j]) for indicator in ALL_INDICATORS}
            )
        row = row.model_copy(
            update={
                "score": coursewide_score(row, weights),
                "score_ifd": coursewide_variant(row, IFD_INDICATORS, weights),
            }
        )
        results.append(row)

    logger.info(f"✓ Course-wide metric for {len(results)} students ({len(active)} with sessions)")
    return results
