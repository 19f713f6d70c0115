"""Chapter Metric Service - Chapter-aligned weekly engagement score"""
import logging
from collections.abc import Iterable, Sequence

import numpy as np

from app.domain.errors import EmptyPopulation, WeightMismatch
from app.domain.schemas import (
    ChapterIndicators,
    ChapterRelease,
    EngagementSeries,
    Session,
    WeeklyEngagement,
)

logger = logging.getLogger(__name__)

DEFAULT_ACTIVITY_KEY: tuple[str, ...] = ("event_context",)


def raw_indicators(
    sessions: Sequence[Session],
    release_day: int | None,
    activity_key: tuple[str, ...] = DEFAULT_ACTIVITY_KEY,
) -> tuple[int, int | None, int]:
    """
    Raw Frequency, Immediacy and Diversity of one student for one chapter.

    Args:
        sessions: The student's sessions for the chapter up to the measurement week
        release_day: Proxy release day of the chapter
        activity_key: Log columns identifying an activity

    Returns:
        (F, I, D); I is None when the student has not engaged
    """
    if not sessions:
        return 0, None, 0

    frequency = len(sessions)
    immediacy = release_day - min(s.start_day_offset for s in sessions)
    activities: set[tuple[str, ...]] = set()
    for session in sessions:
        activities |= session.activities(activity_key)
    return frequency, immediacy, len(activities)


def minmax_scale(values: Sequence[float]) -> np.ndarray:
    """
    Min-max scale values to [0, 1]; a constant population scales to all zeros.

    Raises:
        EmptyPopulation: No values to scale
    """
    array = np.asarray(values, dtype=float)
    if array.size == 0:
        raise EmptyPopulation("cannot min-max scale an empty population")

    low, high = array.min(), array.max()
    if high == low:
        return np.zeros_like(array)
    return (array - low) / (high - low)


def chapter_score(frequency: float, immediacy: float, diversity: float, engaged: bool = True) -> float:
    """Chapter-level IDF score; 0 for unengaged or unreleased chapters"""
    if not engaged:
        return 0.0
    return frequency + immediacy + diversity


def engagement_score(idf_values: Sequence[float], weights: Sequence[float] | None = None) -> float:
    """
    Weighted sum of the IDF scores of chapters 1..K_t.

    Args:
        idf_values: IDF of chapter k at position k-1, 0 for chapters without sessions
        weights: w_k at position k-1 (default all 1)

    Raises:
        WeightMismatch: A released chapter has no weight, or a weight is negative
    """
    if weights is None:
        weights = [1.0] * len(idf_values)
    if len(weights) < len(idf_values):
        raise WeightMismatch(
            f"{len(weights)} chapter weights configured but chapter {len(idf_values)} is released"
        )
    if any(w < 0 for w in weights):
        raise WeightMismatch("chapter weights must be non-negative")

    total = 0.0
    for weight, idf in zip(weights, idf_values):
        total += weight * idf
    return total


class WeeklyScorer:
    """
    Cumulative weekly chapter metric for a retained cohort.

    Release days and first-engagement Immediacy are frozen at the week they
    are first observed; Frequency and Diversity grow with the data.
    """

    def __init__(
        self,
        cohort: Iterable[str],
        weights: Sequence[float] | None = None,
        activity_key: tuple[str, ...] = DEFAULT_ACTIVITY_KEY,
    ):
        self.cohort = sorted(set(cohort))
        self.weights = list(weights) if weights is not None else None
        self.activity_key = activity_key
        self._releases: dict[int, ChapterRelease] = {}
        self._immediacy: dict[tuple[str, int], int] = {}

    def _release(self, chapter: int, week: int, by_user: dict[str, list[Session]]) -> ChapterRelease:
        if chapter not in self._releases:
            first_access = min(min(s.start_day_offset for s in group) for group in by_user.values())
            self._releases[chapter] = ChapterRelease(chapter=chapter, release_day=first_access, observed_from=week)
        return self._releases[chapter]

    def score_week(self, sessions: Sequence[Session], week: int) -> tuple[dict[str, float], list[ChapterIndicators]]:
        """
        Score every cohort member at one week.

        Args:
            sessions: Chapter sessions of the cohort (any week)
            week: Measurement week t

        Returns:
            (y_t per user, indicator rows of the engaged (user, chapter) pairs)
        """
        members = set(self.cohort)
        by_chapter: dict[int, dict[str, list[Session]]] = {}
        for session in sessions:
            if session.excluded_from_metrics or session.week > week or session.user not in members:
                continue
            by_chapter.setdefault(session.chapter, {}).setdefault(session.user, []).append(session)

        released = sorted(by_chapter)
        idf: dict[int, dict[str, float]] = {}
        rows: list[ChapterIndicators] = []

        for chapter in released:
            by_user = by_chapter[chapter]
            release = self._release(chapter, week, by_user)
            users = sorted(by_user)

            raw = []
            for user in users:
                frequency, immediacy, diversity = raw_indicators(by_user[user], release.release_day, self.activity_key)
                immediacy = self._immediacy.setdefault((user, chapter), immediacy)
                raw.append((frequency, immediacy, diversity))

            f_scaled = minmax_scale([r[0] for r in raw])
            i_scaled = minmax_scale([r[1] for r in raw])
            d_scaled = minmax_scale([r[2] for r in raw])

            idf[chapter] = {}
            for j, user in enumerate(users):
                row = ChapterIndicators(
                    user=user,
                    chapter=chapter,
                    week=week,
                    raw_frequency=raw[j][0],
                    raw_immediacy=raw[j][1],
                    raw_diversity=raw[j][2],
                    frequency=float(f_scaled[j]),
                    immediacy=float(i_scaled[j]),
                    diversity=float(d_scaled[j]),
                )
                rows.append(row)
                idf[chapter][user] = chapter_score(row.frequency, row.immediacy, row.diversity, row.engaged)

        # chapters 1..K_t by number; chapters with no sessions yet contribute IDF 0
        numbered = range(1, max(released, default=0) + 1)
        scores = {
            user: engagement_score([idf.get(k, {}).get(user, 0.0) for k in numbered], self.weights)
            for user in self.cohort
        }
        logger.debug(f"Week {week}: {len(released)} chapters released, {len(rows)} engaged pairs")
        return scores, rows

    @property
    def releases(self) -> list[ChapterRelease]:
        return [self._releases[k] for k in sorted(self._releases)]


def weekly_series(
    sessions: Sequence[Session],
    cohort: Iterable[str],
    weeks: Iterable[int],
    weights: Sequence[float] | None = None,
    activity_key: tuple[str, ...] = DEFAULT_ACTIVITY_KEY,
) -> WeeklyEngagement:
    """
    Weekly cumulative engagement of every retained student.

    Students without sessions stay in the cohort with y_t = 0.

    Args:
        sessions: Attributed sessions of the course
        cohort: Retained student identifiers
        weeks: Measurement weeks, ascending
        weights: w_k at position k-1, indexed by chapter number (default all 1)
        activity_key: Log columns identifying an activity for Diversity
    """
    scorer = WeeklyScorer(cohort, weights, activity_key)
    weeks = sorted(weeks)
    series = {user: EngagementSeries(user=user) for user in scorer.cohort}
    indicators: list[ChapterIndicators] = []

    for week in weeks:
        scores, rows = scorer.score_week(sessions, week)
        indicators.extend(rows)
        week_idf: dict[str, dict[int, float]] = {}
        for row in rows:
            week_idf.setdefault(row.user, {})[row.chapter] = row.idf
        for user, entry in series.items():
            entry.scores[week] = scores[user]
            entry.idf[week] = week_idf.get(user, {})

    highest = max((r.chapter for r in scorer.releases), default=0)
    for entry in series.values():
        entry.weights = list(weights) if weights is not None else [1.0] * highest

    logger.info(f"✓ Scored {len(series)} students over {len(weeks)} weeks")
    return WeeklyEngagement(
        weeks=weeks,
        series=list(series.values()),
        indicators=indicators,
        releases=scorer.releases,
    )
