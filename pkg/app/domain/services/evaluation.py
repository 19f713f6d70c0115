"""Evaluation Service - Alignment, predictive validity and early identification"""
import logging
from collections.abc import Mapping, Sequence

import numpy as np
from scipy.stats import spearmanr
from sklearn.metrics import roc_auc_score

from app.domain.errors import CohortMismatch, DegenerateInput, MissingGrade, SingleClass, TooFewStudents
from app.domain.schemas import (
    CohortSummary,
    ConfusionCounts,
    CourseWideIndicators,
    EvaluationReport,
    EvaluationSettings,
    Milestones,
    Quintile,
    QuintileAssignment,
    QuintileSummary,
    WeeklyClassification,
    WeeklyEngagement,
    WeeklyRho,
)

logger = logging.getLogger(__name__)

QUINTILE_ORDER: tuple[Quintile, ...] = tuple(Quintile)


def spearman_rho(x: Sequence[float], y: Sequence[float]) -> float:
    """
    Spearman correlation: Pearson correlation of average ranks.

    Raises:
        DegenerateInput: Fewer than 2 pairs, mismatched lengths, or a constant vector
    """
    a = np.asarray(x, dtype=float)
    b = np.asarray(y, dtype=float)
    if a.size != b.size:
        raise DegenerateInput(f"paired vectors differ in length ({a.size} vs {b.size})")
    if a.size < 2:
        raise DegenerateInput("Spearman correlation needs at least 2 pairs")
    if np.all(a == a[0]) or np.all(b == b[0]):
        raise DegenerateInput("Spearman correlation is undefined for a constant vector")

    rho = float(spearmanr(a, b).statistic)
    return min(1.0, max(-1.0, rho))


def _rho_or_none(x: Sequence[float], y: Sequence[float]) -> float | None:
    try:
        return spearman_rho(x, y)
    except DegenerateInput:
        return None


def _paired(left: Mapping[str, float], right: Mapping[str, float], what: str) -> tuple[list[float], list[float]]:
    missing = sorted(set(left) - set(right))
    if missing:
        raise CohortMismatch(missing, f"students without {what}")
    users = sorted(left)
    return [left[u] for u in users], [right[u] for u in users]


def alignment_series(
    engagement: WeeklyEngagement,
    coursewide: Mapping[str, float],
) -> list[WeeklyRho]:
    """
    Weekly rank agreement between the chapter metric and a course-wide score.

    Weeks where either side is constant report no value.
    """
    series = []
    for week in engagement.weeks:
        weekly, reference = _paired(engagement.scores_at(week), coursewide, "a course-wide score")
        series.append(WeeklyRho(week=week, rho=_rho_or_none(weekly, reference)))
    return series


def grade_correlation_series(
    engagement: WeeklyEngagement,
    grades: Mapping[str, float],
    coursewide: Mapping[str, float] | None = None,
) -> tuple[list[WeeklyRho], float | None]:
    """
    Weekly Spearman correlation between scores and final grades.

    Returns:
        (per-week series, course-wide reference correlation)
    """
    series = []
    for week in engagement.weeks:
        weekly, graded = _paired(engagement.scores_at(week), grades, "a grade")
        series.append(WeeklyRho(week=week, rho=_rho_or_none(weekly, graded)))

    reference = None
    if coursewide is not None:
        scores, graded = _paired(coursewide, grades, "a grade")
        reference = _rho_or_none(scores, graded)
    return series, reference


def assign_quintiles(scores: Mapping[str, float], week: int = 0) -> QuintileAssignment:
    """
    Five equally sized engagement bands.

    Students are ordered by ascending score, ties by ascending identifier.
    VeryLow receives ceil(N/5) students; the remainder is spread from the
    lower bands upwards so sizes differ by at most one.

    Raises:
        TooFewStudents: Fewer than five students
    """
    n = len(scores)
    if n < 5:
        raise TooFewStudents(f"quintiles need at least 5 students, got {n}")

    ordered = sorted(scores, key=lambda user: (scores[user], user))
    base, remainder = divmod(n, 5)
    sizes = [base + 1 if i < remainder else base for i in range(5)]

    labels: dict[str, Quintile] = {}
    start = 0
    for quintile, size in zip(QUINTILE_ORDER, sizes):
        for user in ordered[start:start + size]:
            labels[user] = quintile
        start += size
    return QuintileAssignment(week=week, labels=labels)


def _whiskers(values: np.ndarray, q1: float, q3: float) -> tuple[float, float]:
    spread = 1.5 * (q3 - q1)
    inside = values[(values >= q1 - spread) & (values <= q3 + spread)]
    return float(inside.min()), float(inside.max())


def quintile_grade_summary(
    assignment: QuintileAssignment,
    grades: Mapping[str, float],
    settings: EvaluationSettings | None = None,
) -> list[QuintileSummary]:
    """
    Box-plot statistics of final grades within each quintile.

    Quartiles use linear interpolation between closest ranks; whiskers reach
    the most extreme grades within 1.5 IQR of the box.

    Raises:
        MissingGrade: An assigned student has no grade
    """
    settings = settings or EvaluationSettings()
    summaries = []
    for quintile in QUINTILE_ORDER:
        members = assignment.members(quintile)
        for user in members:
            if user not in grades:
                raise MissingGrade(user)
        values = np.asarray([grades[u] for u in members], dtype=float)
        if values.size == 0:
            continue

        q1, median, q3 = (float(v) for v in np.percentile(values, [25, 50, 75]))
        low, high = _whiskers(values, q1, q3)
        summaries.append(
            QuintileSummary(
                week=assignment.week,
                quintile=quintile,
                n=int(values.size),
                median=median,
                q1=q1,
                q3=q3,
                whisker_low=low,
                whisker_high=high,
                n_below_low=int(np.sum(values < settings.low_threshold)),
                n_below_fail=int(np.sum(values < settings.fail_threshold)),
            )
        )
    return summaries


def roc_auc(scores: Sequence[float], low_performer: Sequence[bool]) -> float:
    """
    AUC of low engagement as a predictor of low performance.

    Equals the probability that a random low performer scores below a random
    other student, ties counting one half.

    Raises:
        SingleClass: Only one class present
    """
    labels = np.asarray(low_performer, dtype=bool)
    if labels.all() or not labels.any():
        raise SingleClass("AUC needs both low performers and other students")
    return float(roc_auc_score(labels, -np.asarray(scores, dtype=float)))


def recall_precision(
    assignment: QuintileAssignment,
    grades: Mapping[str, float],
    threshold: float,
) -> ConfusionCounts:
    """
    Confusion counts of the VeryLow quintile as the flag set.

    Recall and precision are exposed on the returned counts; recall is None
    when no student is below the threshold.
    """
    flagged = set(assignment.members(Quintile.VERY_LOW))
    positives = set()
    for user in assignment.labels:
        if user not in grades:
            raise MissingGrade(user)
        if grades[user] < threshold:
            positives.add(user)

    true_positive = len(flagged & positives)
    return ConfusionCounts(
        flagged=len(flagged),
        true_positive=true_positive,
        false_positive=len(flagged) - true_positive,
        false_negative=len(positives) - true_positive,
        positives_total=len(positives),
        threshold=threshold,
    )


def _classify(
    scores: Mapping[str, float],
    grades: Mapping[str, float],
    threshold: float,
    week: int | None,
) -> WeeklyClassification:
    users = sorted(scores)
    labels = [grades[u] < threshold for u in users]
    try:
        auc = roc_auc([scores[u] for u in users], labels)
    except SingleClass:
        auc = None
    counts = recall_precision(assign_quintiles(scores, week or 0), grades, threshold)
    return WeeklyClassification(week=week, threshold=threshold, auc=auc, counts=counts)


def cohort_summary(grades: Mapping[str, float], settings: EvaluationSettings) -> CohortSummary:
    values = np.asarray(list(grades.values()), dtype=float)
    total = int(values.size)
    below_fail = int(np.sum(values < settings.fail_threshold))
    below_low = int(np.sum(values < settings.low_threshold))
    return CohortSummary(
        total=total,
        mean_grade=float(values.mean()) if total else None,
        below_fail=below_fail,
        below_low=below_low,
        share_below_fail=below_fail / total if total else None,
        share_below_low=below_low / total if total else None,
    )


def _first_week(series: list[WeeklyRho], bar: float | None) -> int | None:
    if bar is None:
        return None
    for point in series:
        if point.rho is not None and point.rho >= bar:
            return point.week
    return None


def evaluate_cohort(
    engagement: WeeklyEngagement,
    coursewide: Sequence[CourseWideIndicators],
    grades: Mapping[str, float],
    settings: EvaluationSettings | None = None,
) -> EvaluationReport:
    """
    Full evaluation of the weekly metric against the course-wide baseline and grades.

    Args:
        engagement: Weekly scores of the retained cohort
        coursewide: Course-wide indicators of the same cohort
        grades: Final grade per retained student
        settings: Grade thresholds and alignment benchmark

    Raises:
        CohortMismatch: Scored students missing from the grades or course-wide table
    """
    settings = settings or EvaluationSettings()
    cohort = sorted(s.user for s in engagement.series)

    missing = [u for u in cohort if u not in grades]
    if missing:
        raise CohortMismatch(missing, "scored students missing from the grades file")

    grades = {u: grades[u] for u in cohort}
    y_full = {row.user: row.score for row in coursewide}
    y_ifd = {row.user: row.score_ifd for row in coursewide}

    alignment = alignment_series(engagement, y_full)
    alignment_ifd = alignment_series(engagement, y_ifd)
    grade_rho, coursewide_rho = grade_correlation_series(engagement, grades, y_full)

    quintiles: list[QuintileSummary] = []
    classification: list[WeeklyClassification] = []
    for week in engagement.weeks:
        scores = engagement.scores_at(week)
        quintiles.extend(quintile_grade_summary(assign_quintiles(scores, week), grades, settings))
        for threshold in settings.thresholds:
            classification.append(_classify(scores, grades, threshold, week))

    y_cohort = {u: y_full[u] for u in cohort}
    reference = [_classify(y_cohort, grades, threshold, None) for threshold in settings.thresholds]

    milestones = Milestones(
        strong_alignment_week=_first_week(alignment, settings.strong_alignment),
        grade_crossover_week=_first_week(grade_rho, coursewide_rho),
    )
    logger.info(
        f"✓ Evaluated {len(cohort)} students over {len(engagement.weeks)} weeks "
        f"(strong alignment from week {milestones.strong_alignment_week})"
    )
    return EvaluationReport(
        cohort=cohort_summary(grades, settings),
        weeks=list(engagement.weeks),
        alignment=alignment,
        alignment_ifd=alignment_ifd,
        grade_correlation=grade_rho,
        coursewide_grade_rho=coursewide_rho,
        quintile_summaries=quintiles,
        classification=classification,
        coursewide_classification=reference,
        milestones=milestones,
    )
