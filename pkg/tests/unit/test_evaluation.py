"""Unit tests for rank correlation, quintiles, AUC and the evaluation report"""
import math

import numpy as np
import pytest

from app.domain.errors import CohortMismatch, DegenerateInput, MissingGrade, SingleClass, TooFewStudents
from app.domain.schemas import (
    CourseWideIndicators,
    EngagementSeries,
    EvaluationSettings,
    Quintile,
    QuintileAssignment,
    WeeklyEngagement,
)
from app.domain.services.evaluation import (
    alignment_series,
    assign_quintiles,
    evaluate_cohort,
    grade_correlation_series,
    quintile_grade_summary,
    recall_precision,
    roc_auc,
    spearman_rho,
)


def _average_ranks(values: list[float]) -> list[float]:
    ranks = [0.0] * len(values)
    for i, v in enumerate(values):
        below = sum(1 for w in values if w < v)
        equal = sum(1 for w in values if w == v)
        ranks[i] = below + (equal + 1) / 2
    return ranks


def _oracle_rho(x: list[float], y: list[float]) -> float:
    rx, ry = _average_ranks(x), _average_ranks(y)
    mx, my = sum(rx) / len(rx), sum(ry) / len(ry)
    cov = sum((a - mx) * (b - my) for a, b in zip(rx, ry))
    vx = sum((a - mx) ** 2 for a in rx)
    vy = sum((b - my) ** 2 for b in ry)
    return cov / math.sqrt(vx * vy)


def _oracle_auc(scores: list[float], low: list[bool]) -> float:
    positives = [s for s, flag in zip(scores, low) if flag]
    negatives = [s for s, flag in zip(scores, low) if not flag]
    wins = sum(1.0 if p < n else 0.5 if p == n else 0.0 for p in positives for n in negatives)
    return wins / (len(positives) * len(negatives))


def _engagement(scores_by_week: dict[int, dict[str, float]]) -> WeeklyEngagement:
    users = sorted(next(iter(scores_by_week.values())))
    series = [EngagementSeries(user=u, scores={w: s[u] for w, s in scores_by_week.items()}) for u in users]
    return WeeklyEngagement(weeks=sorted(scores_by_week), series=series)


def _assignment(sizes: dict[Quintile, int]) -> QuintileAssignment:
    labels, n = {}, 0
    for quintile, size in sizes.items():
        for _ in range(size):
            labels[f"u{n:03d}"] = quintile
            n += 1
    return QuintileAssignment(week=1, labels=labels)


class TestSpearman:
    def test_identity(self):
        assert spearman_rho([1, 2, 3], [1, 2, 3]) == pytest.approx(1.0)

    def test_reversal(self):
        assert spearman_rho([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)

    def test_ties_use_average_ranks(self):
        x, y = [1, 2, 2, 4], [1, 3, 2, 4]

        assert spearman_rho(x, y) == pytest.approx(_oracle_rho(x, y), abs=1e-12)

    def test_constant_vector(self):
        with pytest.raises(DegenerateInput):
            spearman_rho([1, 1, 1], [1, 2, 3])

    def test_too_few_pairs(self):
        with pytest.raises(DegenerateInput):
            spearman_rho([1], [1])

    def test_matches_oracle_on_random_instances(self):
        rng = np.random.default_rng(2024)
        checked = 0
        while checked < 200:
            n = int(rng.integers(2, 51))
            x = [float(v) for v in rng.integers(0, 8, size=n)]
            y = [float(v) for v in rng.integers(0, 8, size=n)]
            if len(set(x)) == 1 or len(set(y)) == 1:
                continue
            assert spearman_rho(x, y) == pytest.approx(_oracle_rho(x, y), abs=1e-12)
            checked += 1

    def test_invariant_under_increasing_transform(self):
        rng = np.random.default_rng(1)
        x, y = rng.normal(size=40), rng.normal(size=40)

        assert spearman_rho(x, y) == pytest.approx(spearman_rho(np.exp(x), y ** 3), abs=1e-12)


class TestQuintiles:
    def test_exact_division(self):
        scores = {f"u{i}": float(i) for i in range(10)}

        assignment = assign_quintiles(scores)

        assert assignment.members(Quintile.VERY_LOW) == ["u0", "u1"]
        assert set(assignment.sizes.values()) == {2}

    def test_bottom_fifth_of_174_is_35(self):
        assignment = assign_quintiles({f"u{i:03d}": float(i) for i in range(174)})

        assert assignment.sizes["VeryLow"] == 35

    def test_ties_break_by_user(self):
        assignment = assign_quintiles({u: 1.0 for u in ["e", "d", "c", "b", "a"]})

        assert [assignment.labels[u] for u in "abcde"] == list(Quintile)

    def test_too_few_students(self):
        with pytest.raises(TooFewStudents):
            assign_quintiles({"a": 1, "b": 2, "c": 3, "d": 4})

    def test_partition_properties(self):
        rng = np.random.default_rng(0)
        for n in range(5, 501):
            scores = {f"u{i:03d}": float(v) for i, v in enumerate(rng.integers(0, 20, size=n))}

            assignment = assign_quintiles(scores)

            sizes = list(assignment.sizes.values())
            assert sum(sizes) == n
            assert max(sizes) - min(sizes) <= 1
            assert assignment.sizes["VeryLow"] == -(-n // 5)
            flagged = assignment.members(Quintile.VERY_LOW)
            others = [u for u in scores if u not in set(flagged)]
            assert max(scores[u] for u in flagged) <= min(scores[u] for u in others)


class TestQuintileGradeSummary:
    def _grades(self, very_low: list[float]) -> tuple[QuintileAssignment, dict[str, float]]:
        assignment = _assignment({q: 3 for q in Quintile})
        grades = {u: 70.0 for u in assignment.labels}
        for user, grade in zip(assignment.members(Quintile.VERY_LOW), very_low):
            grades[user] = grade
        return assignment, grades

    def test_linear_quartiles(self):
        assignment, grades = self._grades([40, 50, 60])

        summary = quintile_grade_summary(assignment, grades)[0]

        assert (summary.q1, summary.median, summary.q3) == (45.0, 50.0, 55.0)
        assert (summary.whisker_low, summary.whisker_high) == (40.0, 60.0)

    def test_constant_grades_give_zero_width_box(self):
        assignment, grades = self._grades([70, 70, 70])

        summary = quintile_grade_summary(assignment, grades)[0]

        assert summary.q1 == summary.median == summary.q3 == 70.0

    def test_threshold_counts(self):
        assignment, grades = self._grades([30, 45, 55])

        summary = quintile_grade_summary(assignment, grades)[0]

        assert (summary.n_below_low, summary.n_below_fail) == (2, 1)

    def test_outlier_is_outside_whiskers(self):
        assignment = _assignment({q: 6 for q in Quintile})
        grades = {u: 60.0 for u in assignment.labels}
        very_low = assignment.members(Quintile.VERY_LOW)
        for user, grade in zip(very_low, [50, 52, 54, 56, 58, 5]):
            grades[user] = grade

        summary = quintile_grade_summary(assignment, grades)[0]

        assert summary.whisker_low == 50.0

    def test_missing_grade(self):
        assignment = _assignment({q: 1 for q in Quintile})

        with pytest.raises(MissingGrade):
            quintile_grade_summary(assignment, {"u000": 50})


class TestRocAuc:
    def test_perfect_separation(self):
        assert roc_auc([1, 2, 8, 9], [True, True, False, False]) == 1.0

    def test_pure_ties(self):
        assert roc_auc([3, 3, 3, 3], [True, False, True, False]) == 0.5

    def test_single_class(self):
        with pytest.raises(SingleClass):
            roc_auc([1, 2, 3], [False, False, False])

    def test_matches_pair_counting_oracle(self):
        rng = np.random.default_rng(77)
        checked = 0
        while checked < 200:
            n = int(rng.integers(2, 51))
            scores = [float(v) for v in rng.integers(0, 10, size=n)]
            low = [bool(v) for v in rng.integers(0, 2, size=n)]
            if all(low) or not any(low):
                continue
            assert roc_auc(scores, low) == pytest.approx(_oracle_auc(scores, low), abs=1e-12)
            checked += 1


class TestRecallPrecision:
    def _counts(self, flagged: int, true_positive: int, positives: int, n: int):
        assignment = _assignment(
            {Quintile.VERY_LOW: flagged, Quintile.LOW: n - flagged, Quintile.MODERATE: 0, Quintile.HIGH: 0,
             Quintile.VERY_HIGH: 0}
        )
        grades = {}
        flagged_users = assignment.members(Quintile.VERY_LOW)
        other_users = [u for u in assignment.labels if u not in set(flagged_users)]
        for i, user in enumerate(flagged_users):
            grades[user] = 35.0 if i < true_positive else 65.0
        for i, user in enumerate(other_users):
            grades[user] = 45.0 if i < positives - true_positive else 65.0
        return recall_precision(assignment, grades, 50.0)

    def test_best_case_counts(self):
        counts = self._counts(flagged=35, true_positive=24, positives=39, n=174)

        assert (counts.false_positive, counts.false_negative) == (11, 15)
        assert round(counts.recall, 2) == 0.62
        assert round(counts.precision, 2) == 0.69
        assert counts.recall == pytest.approx(24 / 39)

    def test_worst_case_counts(self):
        counts = self._counts(flagged=37, true_positive=9, positives=25, n=182)

        assert counts.recall == pytest.approx(0.36)
        assert round(counts.precision, 2) == 0.24
        assert counts.precision == pytest.approx(9 / 37)

    def test_flagged_without_positives_inside(self):
        counts = self._counts(flagged=5, true_positive=0, positives=3, n=25)

        assert (counts.recall, counts.precision) == (0.0, 0.0)

    def test_no_positives_leaves_recall_undefined(self):
        counts = self._counts(flagged=5, true_positive=0, positives=0, n=25)

        assert counts.recall is None
        assert counts.precision == 0.0


class TestSeries:
    def test_alignment_identity(self):
        y = {f"u{i}": float(i) for i in range(8)}
        engagement = _engagement({1: y, 2: y})

        assert [p.rho for p in alignment_series(engagement, y)] == pytest.approx([1.0, 1.0])

    def test_constant_week_has_no_value(self):
        engagement = _engagement({1: {f"u{i}": 0.0 for i in range(5)}, 2: {f"u{i}": float(i) for i in range(5)}})

        series = alignment_series(engagement, {f"u{i}": float(i) for i in range(5)})

        assert series[0].rho is None
        assert series[1].rho == pytest.approx(1.0)

    def test_grade_correlation_identity_and_reference(self):
        final = {f"u{i}": float(i) for i in range(6)}
        engagement = _engagement({1: {u: 0.0 for u in final} | {"u0": 1.0}, 2: final})

        series, reference = grade_correlation_series(engagement, final, coursewide=final)

        assert series[-1].rho == pytest.approx(1.0)
        assert reference == pytest.approx(1.0)

    def test_missing_coursewide_user(self):
        engagement = _engagement({1: {"a": 1.0, "b": 2.0}})

        with pytest.raises(CohortMismatch):
            alignment_series(engagement, {"a": 1.0})


class TestEvaluateCohort:
    def _inputs(self, n: int = 20):
        users = [f"s{i:02d}" for i in range(n)]
        weekly = {1: {u: float(i % 4) for i, u in enumerate(users)}, 2: {u: float(i) for i, u in enumerate(users)}}
        coursewide = [
            CourseWideIndicators(user=u, score=float(i), score_ifd=float(i) / 2) for i, u in enumerate(users)
        ]
        grades = {u: 30.0 + 3 * i for i, u in enumerate(users)}
        return _engagement(weekly), coursewide, grades

    def test_report_shape(self):
        engagement, coursewide, grades = self._inputs()

        report = evaluate_cohort(engagement, coursewide, grades, EvaluationSettings())

        assert report.weeks == [1, 2]
        assert [p.rho for p in report.alignment][1] == pytest.approx(1.0)
        assert report.coursewide_grade_rho == pytest.approx(1.0)
        assert len(report.quintile_summaries) == 10
        assert len(report.classification) == 4
        assert len(report.coursewide_classification) == 2
        assert report.milestones.strong_alignment_week == 2
        assert report.milestones.grade_crossover_week == 2
        assert report.cohort.total == 20
        assert report.cohort.below_fail == 4
        assert report.cohort.below_low == 7

    def test_weekly_classification_uses_bottom_quintile(self):
        engagement, coursewide, grades = self._inputs()

        report = evaluate_cohort(engagement, coursewide, grades, EvaluationSettings())

        week2_fail = next(c for c in report.classification if c.week == 2 and c.threshold == 40)
        assert week2_fail.auc == 1.0
        assert (week2_fail.counts.true_positive, week2_fail.counts.flagged) == (4, 4)

    def test_scored_student_without_grade(self):
        engagement, coursewide, grades = self._inputs()
        del grades["s07"]

        with pytest.raises(CohortMismatch) as excinfo:
            evaluate_cohort(engagement, coursewide, grades)

        assert "s07" in str(excinfo.value)
