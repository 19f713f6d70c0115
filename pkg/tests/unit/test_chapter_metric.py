"""Unit tests for chapter indicators, scaling and the weekly engagement score"""
import numpy as np
import pytest

from app.domain.errors import EmptyPopulation, WeightMismatch
from app.domain.services.chapter_metric import (
    WeeklyScorer,
    chapter_score,
    engagement_score,
    minmax_scale,
    raw_indicators,
    weekly_series,
)
from tests.builders import chapter_session


class TestRawIndicators:
    def test_earliest_engager(self):
        sessions = [chapter_session("a", 1, 7, ["a"])]

        assert raw_indicators(sessions, release_day=7) == (1, 0, 1)

    def test_union_of_activities(self):
        sessions = [chapter_session("a", 1, 9, ["a", "b"]), chapter_session("a", 1, 12, ["b", "c"])]

        assert raw_indicators(sessions, release_day=7) == (2, -2, 3)

    def test_no_sessions_is_unengaged(self):
        assert raw_indicators([], release_day=0) == (0, None, 0)

    def test_activity_key_can_combine_columns(self):
        sessions = [chapter_session("a", 1, 0, ["x", "x"])]

        # same title, but the builder gives every event the same component too
        assert raw_indicators(sessions, 0, activity_key=("event_context", "component"))[2] == 1


class TestMinmaxScale:
    def test_affine(self):
        assert list(minmax_scale([2, 4, 6])) == [0.0, 0.5, 1.0]

    def test_degenerate_population_is_zero(self):
        assert list(minmax_scale([5, 5, 5])) == [0.0, 0.0, 0.0]

    def test_empty_population(self):
        with pytest.raises(EmptyPopulation):
            minmax_scale([])

    def test_rank_order_preserved(self):
        values = np.random.default_rng(5).normal(size=200)

        scaled = minmax_scale(values)

        assert list(np.argsort(scaled, kind="stable")) == list(np.argsort(values, kind="stable"))
        assert scaled.min() == 0.0 and scaled.max() == 1.0


class TestChapterAndEngagementScore:
    def test_upper_bound(self):
        assert chapter_score(1, 1, 1) == 3

    def test_unengaged(self):
        assert chapter_score(0.7, 0.7, 0.7, engaged=False) == 0

    def test_sum(self):
        assert chapter_score(0.2, 0.5, 0.3) == pytest.approx(1.0)

    @pytest.mark.parametrize(
        "idf, weights, expected",
        [([1.5, 0.5], [1, 1], 2.0), ([0, 0], None, 0.0), ([1, 2], [2, 0.5], 3.0), ([], None, 0.0)],
    )
    def test_weighted_sum(self, idf, weights, expected):
        assert engagement_score(idf, weights) == pytest.approx(expected)

    def test_too_few_weights(self):
        with pytest.raises(WeightMismatch):
            engagement_score([1, 1, 1], [1, 1])

    def test_position_is_the_chapter_number(self):
        assert engagement_score([0.0, 2.0], [0.0, 1.0]) == 2.0

    def test_negative_weight(self):
        with pytest.raises(WeightMismatch):
            engagement_score([1], [-1])


class TestWeeklySeries:
    def test_single_student_degenerates_to_zero(self):
        sessions = [chapter_session("a", 1, 0)]

        engagement = weekly_series(sessions, ["a"], range(1, 4))

        assert engagement.scores_at(1) == {"a": 0.0}
        assert engagement.scores_at(3) == {"a": 0.0}

    def test_earlier_more_frequent_broader_student_scores_higher(self):
        sessions = [
            chapter_session("A", 1, 0, ["n1", "n2"]),
            chapter_session("A", 1, 2, ["n3"]),
            chapter_session("B", 1, 3, ["n1"]),
        ]

        engagement = weekly_series(sessions, ["A", "B"], range(1, 5))

        for week in range(1, 5):
            scores = engagement.scores_at(week)
            assert scores["A"] > scores["B"]
            assert scores["A"] == pytest.approx(3.0)

    def test_unreleased_chapter_contributes_nothing(self):
        sessions = [
            chapter_session("a", 1, 0, ["x"]),
            chapter_session("b", 1, 1, ["x", "y"]),
            chapter_session("a", 3, 15, ["z"]),
            chapter_session("b", 3, 16, ["z"]),
        ]

        engagement = weekly_series(sessions, ["a", "b"], range(1, 4))

        for series in engagement.series:
            for week in (1, 2):
                assert 3 not in series.idf[week]
        assert engagement.released_by(2) == [1]
        assert engagement.released_by(3) == [1, 3]

    def test_silent_students_stay_in_cohort_with_zero(self):
        sessions = [chapter_session("a", 1, 0), chapter_session("b", 1, 2, ["p", "q"])]

        engagement = weekly_series(sessions, ["a", "b", "c"], range(1, 3))

        assert engagement.scores_at(2)["c"] == 0.0
        assert sorted(s.user for s in engagement.series) == ["a", "b", "c"]

    def test_general_only_sessions_are_ignored(self):
        general = chapter_session("a", 1, 0).model_copy(update={"chapter": None})

        engagement = weekly_series([general], ["a"], [1])

        assert engagement.releases == []
        assert engagement.scores_at(1) == {"a": 0.0}

    def test_immediacy_and_release_are_frozen(self):
        scorer = WeeklyScorer(["a", "b"])
        week1 = [chapter_session("a", 1, 3), chapter_session("b", 1, 5)]
        week2 = week1 + [chapter_session("b", 1, 8)]

        scorer.score_week(week1, 1)
        _, rows = scorer.score_week(week2, 2)

        by_user = {r.user: r for r in rows}
        assert by_user["a"].raw_immediacy == 0
        assert by_user["b"].raw_immediacy == -2
        assert by_user["b"].raw_frequency == 2
        assert scorer.releases[0].release_day == 3
        assert scorer.releases[0].observed_from == 1

    def test_score_bounds(self):
        rng = np.random.default_rng(9)
        sessions = []
        for u in range(30):
            for k in range(1, 6):
                for _ in range(int(rng.integers(0, 4))):
                    day = (k - 1) * 7 + int(rng.integers(0, 20))
                    titles = [f"r{int(t)}" for t in rng.integers(0, 5, size=int(rng.integers(1, 4)))]
                    sessions.append(chapter_session(f"u{u:02d}", k, day, titles))
        sessions.sort(key=lambda s: (s.user, s.start_day_offset))

        engagement = weekly_series(sessions, [f"u{u:02d}" for u in range(30)], range(1, 8))

        for week in engagement.weeks:
            k_t = len(engagement.released_by(week))
            for score in engagement.scores_at(week).values():
                assert 0.0 <= score <= 3 * k_t + 1e-12
        for row in engagement.indicators:
            assert 0.0 <= row.idf <= 3.0

    def test_scaling_weights_scales_scores(self):
        sessions = [
            chapter_session("a", 1, 0, ["x"]),
            chapter_session("b", 1, 2, ["x", "y"]),
            chapter_session("b", 2, 7, ["z"]),
            chapter_session("c", 2, 9, ["z", "w"]),
            chapter_session("c", 2, 10, ["z"]),
        ]
        users = ["a", "b", "c"]

        base = weekly_series(sessions, users, [2], weights=[1.0, 2.0])
        doubled = weekly_series(sessions, users, [2], weights=[2.0, 4.0])

        for user in users:
            assert doubled.scores_at(2)[user] == pytest.approx(2 * base.scores_at(2)[user])

    def test_weights_follow_chapter_numbers_across_a_gap(self):
        sessions = [
            chapter_session("a", 2, 0, ["x"]),
            chapter_session("b", 2, 0, ["x", "y"]),
            chapter_session("b", 2, 1, ["y"]),
        ]

        engagement = weekly_series(sessions, ["a", "b"], [1], weights=[0.0, 1.0])
        heavy_first = weekly_series(sessions, ["a", "b"], [1], weights=[5.0, 1.0])

        assert engagement.scores_at(1) == {"a": 0.0, "b": 2.0}
        assert heavy_first.scores_at(1) == engagement.scores_at(1)
        assert engagement.series[0].weights == [0.0, 1.0]

    def test_released_chapter_number_beyond_the_weights(self):
        sessions = [chapter_session("a", 2, 0), chapter_session("b", 2, 1, ["p", "q"])]

        with pytest.raises(WeightMismatch):
            weekly_series(sessions, ["a", "b"], [1], weights=[1.0])

    def test_default_weights_cover_chapters_up_to_the_highest_number(self):
        sessions = [chapter_session("a", 3, 0), chapter_session("b", 3, 1, ["p", "q"])]

        engagement = weekly_series(sessions, ["a", "b"], [1])

        assert engagement.series[0].weights == [1.0, 1.0, 1.0]

    def test_weight_mismatch_when_more_chapters_release(self):
        sessions = [chapter_session("a", 1, 0), chapter_session("a", 2, 7)]

        with pytest.raises(WeightMismatch):
            weekly_series(sessions, ["a"], [1, 2], weights=[1.0])
