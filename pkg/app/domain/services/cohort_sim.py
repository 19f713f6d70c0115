"""Cohort Simulation Service - Seeded synthetic clickstreams and grades"""
import logging
from dataclasses import dataclass, field
from datetime import datetime, timedelta

import numpy as np

from app.domain.errors import InvalidConfig
from app.domain.schemas import (
    ArchetypeConfig,
    CourseCalendar,
    GradeRecord,
    LogEvent,
    SimulatedCohort,
    SimulationConfig,
)

logger = logging.getLogger(__name__)

EVENT_NAME = "Course module viewed"
DAY_START_MINUTE = 8 * 60
SESSION_SPACING_MINUTES = 150

RESOURCE_KINDS: tuple[tuple[str, str], ...] = (
    ("Notes", "File"),
    ("Slides", "File"),
    ("Video", "Page"),
    ("Quiz", "Quiz"),
    ("Problem Sheet", "Assignment"),
    ("Solutions", "File"),
    ("Reading", "URL"),
    ("Exercises", "Page"),
)


@dataclass
class _Resource:
    title: str
    component: str
    module_id: int


@dataclass
class _PlannedSession:
    day: int
    clicks: list[_Resource] = field(default_factory=list)


def validate_simulation(calendar: CourseCalendar, config: SimulationConfig) -> None:
    """
    Check a simulation config against the calendar.

    Raises:
        InvalidConfig: Empty or unnormalised archetype mix, bad release schedule
    """
    if not config.archetypes:
        raise InvalidConfig("simulation needs at least one archetype")
    total = sum(a.weight for a in config.archetypes)
    if abs(total - 1.0) > 1e-6:
        raise InvalidConfig(f"archetype weights must sum to 1, got {total:g}")

    if config.release_weeks is not None:
        if len(config.release_weeks) != config.num_chapters:
            raise InvalidConfig(
                f"release_weeks lists {len(config.release_weeks)} weeks for {config.num_chapters} chapters"
            )
        weeks = config.release_weeks
    else:
        weeks = list(range(1, config.num_chapters + 1))
    bad = [w for w in weeks if not 1 <= w <= calendar.num_weeks]
    if bad:
        raise InvalidConfig(f"chapter release weeks outside 1..{calendar.num_weeks}: {bad}")

    if config.grade_model.floor > config.grade_model.ceiling:
        raise InvalidConfig("grade floor above ceiling")
    if config.general_session_rate > 0 and not config.general_resources:
        raise InvalidConfig("general sessions requested but no general resources configured")


def _catalog(config: SimulationConfig) -> tuple[dict[int, list[_Resource]], list[_Resource]]:
    module_id = 100
    chapters: dict[int, list[_Resource]] = {}
    for chapter in range(1, config.num_chapters + 1):
        resources = []
        for j in range(config.resources_per_chapter):
            if j < len(RESOURCE_KINDS):
                kind, component = RESOURCE_KINDS[j]
            else:
                kind, component = f"Resource {j + 1}", "Page"
            module_id += 1
            resources.append(_Resource(f"Chapter {chapter} {kind}", component, module_id))
        chapters[chapter] = resources

    general = []
    for resource in config.general_resources:
        module_id += 1
        general.append(_Resource(resource.title, resource.component, module_id))
    return chapters, general


def _allocate(archetypes: list[ArchetypeConfig], size: int, rng: np.random.Generator) -> list[ArchetypeConfig]:
    # largest remainder, then shuffled
    quotas = [a.weight * size for a in archetypes]
    counts = [int(q) for q in quotas]
    order = sorted(range(len(archetypes)), key=lambda i: (counts[i] - quotas[i], i))
    for i in order[: size - sum(counts)]:
        counts[i] += 1
    pool = [archetypes[i] for i, c in enumerate(counts) for _ in range(c)]
    return [pool[i] for i in rng.permutation(len(pool))]


class _StudentSimulator:
    """Plans and renders the sessions of one simulated student"""

    def __init__(
        self,
        user: str,
        archetype: ArchetypeConfig,
        calendar: CourseCalendar,
        config: SimulationConfig,
        chapters: dict[int, list[_Resource]],
        general: list[_Resource],
        rng: np.random.Generator,
    ):
        self.user = user
        self.archetype = archetype
        self.calendar = calendar
        self.config = config
        self.chapters = chapters
        self.general = general
        self.rng = rng

        dispersion = archetype.rate_dispersion
        multiplier = rng.gamma(1.0 / dispersion, dispersion) if dispersion > 0 else 1.0
        self.rate = archetype.session_rate * multiplier
        self.delay = archetype.first_access_delay_days * rng.gamma(4.0, 0.25)
        if archetype.dropout_week is not None:
            self.stop_day = min(calendar.term_days, (archetype.dropout_week - 1) * calendar.week_length_days)
        else:
            self.stop_day = calendar.term_days

    @property
    def latent(self) -> float:
        return self.rate * self.stop_day / self.calendar.term_days

    def _burst(self, resources: list[_Resource]) -> list[_Resource]:
        n_clicks = 1 + int(self.rng.poisson(max(self.archetype.breadth - 1.0, 0.0)))
        picks = self.rng.integers(0, len(resources), size=n_clicks)
        clicks = [resources[i] for i in picks]
        if self.general and self.rng.random() < self.config.general_click_prob:
            position = int(self.rng.integers(0, len(clicks) + 1))
            clicks.insert(position, self.general[int(self.rng.integers(0, len(self.general)))])
        return clicks

    def plan(self) -> list[_PlannedSession]:
        planned: list[_PlannedSession] = []
        week_length = self.calendar.week_length_days

        for chapter, resources in self.chapters.items():
            release_day = (self.config.release_week(chapter) - 1) * week_length
            n_sessions = int(self.rng.poisson(self.rate))
            if n_sessions == 0:
                continue
            day = release_day + int(self.rng.exponential(self.delay)) if self.delay > 0 else release_day
            for index in range(n_sessions):
                if index:
                    day += int(self.rng.exponential(self.config.revision_spread_days))
                if day >= self.stop_day:
                    break
                planned.append(_PlannedSession(day=day, clicks=self._burst(resources)))

        for week in range(1, self.calendar.num_weeks + 1):
            for _ in range(int(self.rng.poisson(self.config.general_session_rate))):
                day = (week - 1) * week_length + int(self.rng.integers(0, week_length))
                if day >= self.stop_day:
                    continue
                n_clicks = 1 + int(self.rng.integers(0, 2))
                clicks = [self.general[int(i)] for i in self.rng.integers(0, len(self.general), size=n_clicks)]
                planned.append(_PlannedSession(day=day, clicks=clicks))

        order = self.rng.permutation(len(planned))
        return sorted((planned[i] for i in order), key=lambda s: s.day)

    def render(self, planned: list[_PlannedSession]) -> list[LogEvent]:
        events: list[LogEvent] = []
        term_end = self.calendar.term_start_instant + timedelta(days=self.calendar.term_days)
        current_day = None
        cursor: datetime | None = None

        for session in planned:
            day_start = self.calendar.term_start_instant + timedelta(days=session.day)
            if session.day != current_day or cursor is None:
                current_day = session.day
                cursor = day_start + timedelta(minutes=DAY_START_MINUTE + int(self.rng.integers(0, 240)))
            else:
                cursor += timedelta(minutes=SESSION_SPACING_MINUTES + int(self.rng.integers(0, 60)))

            for j, resource in enumerate(session.clicks):
                if j:
                    cursor += timedelta(minutes=int(self.rng.integers(0, self.config.burst_max_gap_minutes + 1)))
                if cursor >= term_end:
                    break
                events.append(
                    LogEvent(
                        time=cursor,
                        user=self.user,
                        event_context=resource.title,
                        component=resource.component,
                        event_name=EVENT_NAME,
                        description=(
                            f"The user with id '{self.user}' viewed the '{resource.component.lower()}' "
                            f"activity with course module id '{resource.module_id}'."
                        ),
                    )
                )
        return events


def _grades(
    users: list[str],
    latent: np.ndarray,
    config: SimulationConfig,
    rng: np.random.Generator,
) -> list[GradeRecord]:
    model = config.grade_model
    spread = latent.std()
    z = (latent - latent.mean()) / spread if spread > 0 else np.zeros_like(latent)
    noise = rng.normal(0.0, 1.0, size=latent.size)
    absent = rng.random(size=latent.size) < model.absence_rate

    raw = model.base_grade + model.engagement_coefficient * z + model.noise_scale * noise
    clipped = np.clip(raw, model.floor, model.ceiling)
    records = []
    for user, grade, is_absent in zip(users, clipped, absent):
        records.append(GradeRecord(user=user, final_grade=0.0 if is_absent else round(float(grade), 1)))
    return records


def generate_cohort(calendar: CourseCalendar, config: SimulationConfig) -> SimulatedCohort:
    """
    Generate a synthetic cohort: activity-log events, grades and latent engagement.

    Every random draw derives from config.seed, one child seed per student,
    so identical inputs give identical output.

    Raises:
        InvalidConfig: Invalid archetype mix or release schedule
    """
    validate_simulation(calendar, config)

    chapters, general = _catalog(config)
    seeds = np.random.SeedSequence(config.seed).spawn(config.cohort_size + 1)
    cohort_rng = np.random.default_rng(seeds[-1])
    archetypes = _allocate(config.archetypes, config.cohort_size, cohort_rng)

    users: list[str] = []
    latent: list[float] = []
    archetype_of: dict[str, str] = {}
    events: list[LogEvent] = []

    for index, (archetype, seed) in enumerate(zip(archetypes, seeds[:-1]), start=1):
        user = f"s{index:04d}"
        student = _StudentSimulator(user, archetype, calendar, config, chapters, general, np.random.default_rng(seed))
        events.extend(student.render(student.plan()))
        users.append(user)
        latent.append(student.latent)
        archetype_of[user] = archetype.name

    events.sort(key=lambda e: (e.time, e.user))
    grades = _grades(users, np.asarray(latent, dtype=float), config, cohort_rng)

    logger.info(f"✓ Simulated {len(users)} students, {len(events)} events (seed {config.seed})")
    return SimulatedCohort(
        events=events,
        grades=grades,
        latent=dict(zip(users, latent)),
        archetype_of=archetype_of,
    )
