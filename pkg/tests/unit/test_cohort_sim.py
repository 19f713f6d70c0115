"""Unit tests for the seeded cohort simulator"""
from collections import Counter, defaultdict

import numpy as np
import pytest

from app.domain.errors import InvalidConfig
from app.domain.schemas import ArchetypeConfig, ChapterRules, GradeModel, SimulationConfig
from app.domain.services.chapter_metric import weekly_series
from app.domain.services.cohort_sim import generate_cohort, validate_simulation
from app.domain.services.evaluation import spearman_rho
from app.domain.services.ingest import label_events
from app.domain.services.sessionizer import compute_gap_threshold, sessionize_cohort


def _config(**overrides) -> SimulationConfig:
    return SimulationConfig(**{"cohort_size": 40, **overrides})


def _silent(**overrides) -> SimulationConfig:
    return _config(
        **{
            "general_session_rate": 0.0,
            "archetypes": [ArchetypeConfig(name="silent", session_rate=0.0, rate_dispersion=0.0, weight=1.0)],
            "grade_model": GradeModel(base_grade=62, noise_scale=0),
            **overrides,
        }
    )


class TestDeterminism:
    def test_same_seed_same_cohort(self, calendar):
        first = generate_cohort(calendar, _config(seed=11))
        second = generate_cohort(calendar, _config(seed=11))

        assert first.events == second.events
        assert first.grades == second.grades
        assert first.latent == second.latent

    def test_different_seeds_differ(self, calendar):
        first = generate_cohort(calendar, _config(seed=1))
        second = generate_cohort(calendar, _config(seed=2))

        assert first.events != second.events


class TestSilentCohort:
    def test_no_events_and_base_grades(self, calendar):
        cohort = generate_cohort(calendar, _silent())

        assert cohort.events == []
        assert len(cohort.grades) == 40
        assert {g.final_grade for g in cohort.grades} == {62.0}

    def test_everyone_absent(self, calendar):
        cohort = generate_cohort(calendar, _silent(grade_model=GradeModel(absence_rate=1.0)))

        assert {g.final_grade for g in cohort.grades} == {0.0}


class TestValidation:
    @pytest.mark.parametrize(
        "overrides",
        [
            {"archetypes": []},
            {"archetypes": [ArchetypeConfig(name="a", session_rate=1, weight=0.5)]},
            {"num_chapters": 3, "release_weeks": [1, 2]},
            {"num_chapters": 2, "release_weeks": [1, 12]},
            {"num_chapters": 12},
            {"grade_model": GradeModel(floor=80, ceiling=20)},
            {"general_resources": [], "general_session_rate": 0.5},
        ],
    )
    def test_invalid_configs(self, calendar, overrides):
        with pytest.raises(InvalidConfig):
            validate_simulation(calendar, _config(**overrides))

    def test_default_config_is_valid(self, calendar):
        validate_simulation(calendar, SimulationConfig())


class TestGeneratedLog:
    @pytest.fixture
    def cohort(self, calendar):
        return generate_cohort(calendar, _config(seed=5, cohort_size=60))

    def test_events_inside_the_term_and_ordered(self, calendar, cohort):
        days = [calendar.day_offset(e.time) for e in cohort.events]

        assert all(calendar.in_term(d) for d in days)
        assert [e.time for e in cohort.events] == sorted(e.time for e in cohort.events)

    def test_chapter_events_never_precede_release(self, calendar, cohort):
        labeled = label_events(cohort.events, calendar, ChapterRules())

        assert len(labeled) == len(cohort.events)
        for event in labeled:
            if event.chapter is not None:
                assert event.week >= event.chapter

    def test_users_and_archetype_allocation(self, calendar, cohort):
        assert sorted(cohort.latent) == [f"s{i:04d}" for i in range(1, 61)]
        # 0.35/0.35/0.2/0.1 of 60
        assert Counter(cohort.archetype_of.values()) == {"engaged": 21, "steady": 21, "lagging": 12, "dropout": 6}

    def test_dropouts_stop_before_their_week(self, calendar, cohort):
        dropouts = {u for u, name in cohort.archetype_of.items() if name == "dropout"}
        last_day = (5 - 1) * calendar.week_length_days

        for event in cohort.events:
            if event.user in dropouts:
                assert calendar.day_offset(event.time) < last_day

    def test_grades_within_bounds(self, cohort):
        assert all(0.0 <= g.final_grade <= 100.0 for g in cohort.grades)


class TestCoupling:
    @pytest.mark.slow
    @pytest.mark.parametrize("seed", range(20))
    def test_higher_rate_archetype_has_larger_frequency_every_week(self, calendar, seed):
        rates = {"busy": 3.0, "steady": 1.5, "quiet": 0.5}
        config = _config(
            seed=seed,
            cohort_size=210,
            archetypes=[ArchetypeConfig(name=name, session_rate=rate, weight=1 / 3) for name, rate in rates.items()],
        )
        cohort = generate_cohort(calendar, config)
        members = sorted(cohort.archetype_of)

        events = label_events(cohort.events, calendar, ChapterRules())
        sessions = sessionize_cohort(events, compute_gap_threshold(events))
        engagement = weekly_series(sessions, members, range(1, calendar.num_weeks + 1))

        frequency: dict[tuple[int, str], int] = defaultdict(int)
        for row in engagement.indicators:
            frequency[(row.week, row.user)] += row.raw_frequency
        for week in engagement.weeks:
            means = [
                np.mean([frequency[(week, u)] for u in members if cohort.archetype_of[u] == name])
                for name in rates
            ]
            assert means[0] > means[1] > means[2], f"week {week}: {means}"

    def test_grades_follow_latent_engagement(self, calendar):
        config = _config(seed=9, cohort_size=300, grade_model=GradeModel(engagement_coefficient=15, noise_scale=3))

        cohort = generate_cohort(calendar, config)

        users = sorted(cohort.latent)
        grades = {g.user: g.final_grade for g in cohort.grades}
        assert spearman_rho([cohort.latent[u] for u in users], [grades[u] for u in users]) > 0.7

    def test_null_grade_model_is_uncoupled(self, calendar):
        config = _config(
            seed=13,
            cohort_size=400,
            grade_model=GradeModel(base_grade=55, engagement_coefficient=0, noise_scale=15),
        )

        cohort = generate_cohort(calendar, config)

        users = sorted(cohort.latent)
        grades = {g.user: g.final_grade for g in cohort.grades}
        assert abs(spearman_rho([cohort.latent[u] for u in users], [grades[u] for u in users])) < 0.2
