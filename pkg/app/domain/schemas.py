"""Domain Schemas - Types flowing through the engagement pipeline"""
import re
from datetime import date, datetime, time, timedelta
from enum import Enum
from typing import Annotated, Literal

from pydantic import BaseModel, ConfigDict, Field, computed_field, field_validator, model_validator

from app.domain.errors import InvariantViolation


# ---------------------------------------------------------------------------
# Ingest
# ---------------------------------------------------------------------------


class ColumnMapping(BaseModel):
    """Header names of the six activity-log columns (exports may rename them)"""

    time: str = "Time"
    user: str = "User"
    event_context: str = "Event.context"
    component: str = "Component"
    event_name: str = "Event.name"
    description: str = "Description"


class LogEvent(BaseModel):
    """One VLE click record"""

    model_config = ConfigDict(frozen=True)

    time: datetime
    user: str = Field(..., min_length=1)
    event_context: str = ""
    component: str = ""
    event_name: str = ""
    description: str = ""


class RejectedRow(BaseModel):
    row_index: int
    reason: str


class ParsedLog(BaseModel):
    """Events in ascending time order plus the rows rejected in lenient mode"""

    events: list[LogEvent] = Field(default_factory=list)
    rejected: list[RejectedRow] = Field(default_factory=list)


class CourseCalendar(BaseModel):
    """
    Teaching calendar of a course.

    Week w covers days [(w-1)*week_length_days, w*week_length_days) from term_start.
    """

    model_config = ConfigDict(frozen=True)

    term_start: date = date(2022, 9, 26)
    num_weeks: int = Field(11, gt=0)
    week_length_days: int = Field(7, gt=0)

    @property
    def term_days(self) -> int:
        return self.num_weeks * self.week_length_days

    @property
    def term_start_instant(self) -> datetime:
        return datetime.combine(self.term_start, time.min)

    def day_offset(self, instant: datetime) -> int:
        return (instant.date() - self.term_start).days

    def week_of(self, day_offset: int) -> int:
        return day_offset // self.week_length_days + 1

    def in_term(self, day_offset: int) -> bool:
        return 0 <= day_offset < self.term_days

    def measurement_anchor(self, week: int) -> datetime:
        """Last minute of the last day of the given week"""
        last_day = self.term_start + timedelta(days=week * self.week_length_days - 1)
        return datetime.combine(last_day, time(23, 59))


ChapterNumber = Annotated[int, Field(ge=1)]
OverrideLabel = ChapterNumber | Literal["General", "Excluded"]


class ChapterRules(BaseModel):
    """How resource titles map to chapter labels"""

    numeric_pattern: str = r"(?i)\bchapter\s*(\d+)"
    overrides: dict[str, OverrideLabel] = Field(default_factory=dict)
    general_markers: list[str] = Field(default_factory=lambda: ["forum"])
    title_field: Literal["event_context", "event_name"] = "event_context"

    @field_validator("numeric_pattern")
    @classmethod
    def _pattern_has_group(cls, value: str) -> str:
        try:
            compiled = re.compile(value)
        except re.error as e:
            raise ValueError(f"invalid numeric_pattern: {e}")
        if compiled.groups < 1:
            raise ValueError("numeric_pattern must capture the chapter number in group 1")
        return value


class LabeledEvent(BaseModel):
    """A log event placed in the teaching calendar; chapter None means General"""

    model_config = ConfigDict(frozen=True)

    event: LogEvent
    week: int = Field(..., ge=1)
    day_offset: int = Field(..., ge=0)
    chapter: ChapterNumber | None = None

    @property
    def user(self) -> str:
        return self.event.user

    @property
    def time(self) -> datetime:
        return self.event.time

    @property
    def chapter_label(self) -> str:
        return "General" if self.chapter is None else f"Chapter({self.chapter})"


class GradeRecord(BaseModel):
    """Final grade of one student; zero final or exam grade marks an absence"""

    model_config = ConfigDict(frozen=True)

    user: str = Field(..., min_length=1)
    final_grade: float = Field(..., ge=0, le=100)
    exam_grade: float | None = Field(default=None, ge=0, le=100)

    @computed_field
    @property
    def excluded(self) -> bool:
        return self.final_grade == 0 or self.exam_grade == 0


# ---------------------------------------------------------------------------
# Sessionizer
# ---------------------------------------------------------------------------


class ThresholdSource(str, Enum):
    COMPUTED = "computed"
    CONFIGURED = "configured"


class GapThreshold(BaseModel):
    minutes: float = Field(..., gt=0, le=120)
    source: ThresholdSource
    sample_size: int = 0


class Session(BaseModel):
    """
    A chapter-attributed run of one student's events.

    chapter None is a GeneralOnly session, kept for the course-wide metric
    and excluded from the chapter metric.
    """

    model_config = ConfigDict(frozen=True)

    user: str
    events: list[LabeledEvent] = Field(..., min_length=1)
    start_day_offset: int
    week: int
    chapter: int | None = None

    @property
    def excluded_from_metrics(self) -> bool:
        return self.chapter is None

    @property
    def n_events(self) -> int:
        return len(self.events)

    def activities(self, key: tuple[str, ...]) -> set[tuple[str, ...]]:
        return {tuple(getattr(e.event, column) for column in key) for e in self.events}


# ---------------------------------------------------------------------------
# Chapter metric
# ---------------------------------------------------------------------------


class ChapterRelease(BaseModel):
    chapter: int
    release_day: int
    observed_from: int


class ChapterIndicators(BaseModel):
    """Raw and scaled Immediacy/Frequency/Diversity of one (student, chapter, week)"""

    user: str
    chapter: int
    week: int
    raw_frequency: int = Field(0, ge=0)
    raw_immediacy: int | None = Field(default=None, le=0)
    raw_diversity: int = Field(0, ge=0)
    frequency: float = Field(0.0, ge=0, le=1)
    immediacy: float = Field(0.0, ge=0, le=1)
    diversity: float = Field(0.0, ge=0, le=1)

    @property
    def engaged(self) -> bool:
        return self.raw_frequency >= 1

    @computed_field
    @property
    def idf(self) -> float:
        if not self.engaged:
            return 0.0
        return self.frequency + self.immediacy + self.diversity


class EngagementSeries(BaseModel):
    """Cumulative weekly score y_t of one student"""

    user: str
    scores: dict[int, float] = Field(default_factory=dict)
    idf: dict[int, dict[int, float]] = Field(default_factory=dict)
    weights: list[float] = Field(default_factory=list)


class WeeklyEngagement(BaseModel):
    weeks: list[int]
    series: list[EngagementSeries]
    indicators: list[ChapterIndicators] = Field(default_factory=list)
    releases: list[ChapterRelease] = Field(default_factory=list)

    def scores_at(self, week: int) -> dict[str, float]:
        return {s.user: s.scores[week] for s in self.series}

    def released_by(self, week: int) -> list[int]:
        return sorted(r.chapter for r in self.releases if r.observed_from <= week)


# ---------------------------------------------------------------------------
# Course-wide metric
# ---------------------------------------------------------------------------


class Indicator(str, Enum):
    IMMEDIACY = "immediacy"
    FREQUENCY = "frequency"
    DIVERSITY = "diversity"
    RECENCY = "recency"
    INTERVAL = "interval"


ALL_INDICATORS: tuple[Indicator, ...] = tuple(Indicator)
IFD_INDICATORS: tuple[Indicator, ...] = (Indicator.IMMEDIACY, Indicator.FREQUENCY, Indicator.DIVERSITY)


class CourseWideWeights(BaseModel):
    immediacy: float = Field(1.0, ge=0)
    frequency: float = Field(1.0, ge=0)
    diversity: float = Field(1.0, ge=0)
    recency: float = Field(1.0, ge=0)
    interval: float = Field(1.0, ge=0)

    def weight(self, indicator: Indicator) -> float:
        return getattr(self, indicator.value)


class CourseWideIndicators(BaseModel):
    user: str
    raw_immediacy: int | None = None
    raw_frequency: int = 0
    raw_diversity: int = 0
    raw_recency: int | None = None
    raw_interval: int | None = None
    immediacy: float = Field(0.0, ge=0, le=1)
    frequency: float = Field(0.0, ge=0, le=1)
    diversity: float = Field(0.0, ge=0, le=1)
    recency: float = Field(0.0, ge=0, le=1)
    interval: float = Field(0.0, ge=0, le=1)
    score: float = 0.0
    score_ifd: float = 0.0

    def raw(self, indicator: Indicator) -> int | None:
        return getattr(self, f"raw_{indicator.value}")

    def scaled(self, indicator: Indicator) -> float:
        return getattr(self, indicator.value)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


class Quintile(str, Enum):
    VERY_LOW = "VeryLow"
    LOW = "Low"
    MODERATE = "Moderate"
    HIGH = "High"
    VERY_HIGH = "VeryHigh"


class QuintileAssignment(BaseModel):
    week: int
    labels: dict[str, Quintile]

    @computed_field
    @property
    def sizes(self) -> dict[str, int]:
        counts = {q.value: 0 for q in Quintile}
        for label in self.labels.values():
            counts[label.value] += 1
        return counts

    def members(self, quintile: Quintile) -> list[str]:
        return sorted(u for u, q in self.labels.items() if q is quintile)


class ConfusionCounts(BaseModel):
    flagged: int = Field(..., ge=0)
    true_positive: int = Field(..., ge=0)
    false_positive: int = Field(..., ge=0)
    false_negative: int = Field(..., ge=0)
    positives_total: int = Field(..., ge=0)
    threshold: float

    @model_validator(mode="after")
    def _identities(self) -> "ConfusionCounts":
        if self.flagged != self.true_positive + self.false_positive:
            raise InvariantViolation("flagged != true_positive + false_positive")
        if self.positives_total != self.true_positive + self.false_negative:
            raise InvariantViolation("positives_total != true_positive + false_negative")
        return self

    @computed_field
    @property
    def recall(self) -> float | None:
        if self.positives_total == 0:
            return None
        return self.true_positive / self.positives_total

    @computed_field
    @property
    def precision(self) -> float | None:
        if self.flagged == 0:
            return None
        return self.true_positive / self.flagged


class QuintileSummary(BaseModel):
    week: int
    quintile: Quintile
    n: int
    median: float
    q1: float
    q3: float
    whisker_low: float
    whisker_high: float
    n_below_low: int
    n_below_fail: int


class WeeklyRho(BaseModel):
    week: int
    rho: float | None = None


class WeeklyClassification(BaseModel):
    week: int | None = None
    threshold: float
    auc: float | None = None
    counts: ConfusionCounts


class CohortSummary(BaseModel):
    total: int
    mean_grade: float | None
    below_fail: int
    below_low: int
    share_below_fail: float | None
    share_below_low: float | None


class Milestones(BaseModel):
    strong_alignment_week: int | None = None
    grade_crossover_week: int | None = None


class EvaluationSettings(BaseModel):
    low_threshold: float = Field(50.0, ge=0, le=100)
    fail_threshold: float = Field(40.0, ge=0, le=100)
    strong_alignment: float = Field(0.8, ge=-1, le=1)

    @property
    def thresholds(self) -> tuple[float, float]:
        return (self.low_threshold, self.fail_threshold)


class EvaluationReport(BaseModel):
    cohort: CohortSummary
    weeks: list[int]
    alignment: list[WeeklyRho]
    alignment_ifd: list[WeeklyRho]
    grade_correlation: list[WeeklyRho]
    coursewide_grade_rho: float | None
    quintile_summaries: list[QuintileSummary]
    classification: list[WeeklyClassification]
    coursewide_classification: list[WeeklyClassification]
    milestones: Milestones


# ---------------------------------------------------------------------------
# Cohort simulation
# ---------------------------------------------------------------------------


class ArchetypeConfig(BaseModel):
    """Behavioural profile of a group of simulated students"""

    name: str
    session_rate: float = Field(..., ge=0, description="Mean study sessions per released chapter")
    rate_dispersion: float = Field(0.3, ge=0, description="Variance of the per-student rate multiplier")
    first_access_delay_days: float = Field(2.0, ge=0)
    breadth: float = Field(2.0, ge=0, description="Mean distinct activities touched per session")
    dropout_week: int | None = Field(default=None, ge=1)
    weight: float = Field(..., ge=0)


class GradeModel(BaseModel):
    base_grade: float = Field(62.0, ge=0, le=100)
    engagement_coefficient: float = 12.0
    noise_scale: float = Field(10.0, ge=0)
    floor: float = Field(0.0, ge=0, le=100)
    ceiling: float = Field(100.0, ge=0, le=100)
    absence_rate: float = Field(0.0, ge=0, le=1)


class GeneralResource(BaseModel):
    title: str
    component: str


def _default_archetypes() -> list[ArchetypeConfig]:
    return [
        ArchetypeConfig(name="engaged", session_rate=3.0, first_access_delay_days=1.0, breadth=3.0, weight=0.35),
        ArchetypeConfig(name="steady", session_rate=1.8, first_access_delay_days=3.0, breadth=2.0, weight=0.35),
        ArchetypeConfig(name="lagging", session_rate=0.8, first_access_delay_days=6.0, breadth=1.5, weight=0.2),
        ArchetypeConfig(name="dropout", session_rate=1.5, first_access_delay_days=3.0, breadth=2.0, dropout_week=5, weight=0.1),
    ]


def _default_general_resources() -> list[GeneralResource]:
    return [
        GeneralResource(title="Course forum", component="Forum"),
        GeneralResource(title="Reading list", component="URL"),
        GeneralResource(title="Module handbook", component="File"),
    ]


class SimulationConfig(BaseModel):
    seed: int = 1
    cohort_size: int = Field(200, ge=1)
    num_chapters: int = Field(11, ge=1)
    release_weeks: list[int] | None = None
    resources_per_chapter: int = Field(6, ge=1)
    general_resources: list[GeneralResource] = Field(default_factory=_default_general_resources)
    general_click_prob: float = Field(0.2, ge=0, le=1)
    general_session_rate: float = Field(0.3, ge=0, description="GeneralOnly sessions per student-week")
    revision_spread_days: float = Field(4.0, gt=0)
    burst_max_gap_minutes: int = Field(4, ge=1, le=4)
    archetypes: list[ArchetypeConfig] = Field(default_factory=_default_archetypes)
    grade_model: GradeModel = Field(default_factory=GradeModel)

    def release_week(self, chapter: int) -> int:
        if self.release_weeks is not None:
            return self.release_weeks[chapter - 1]
        return chapter


class SimulatedCohort(BaseModel):
    events: list[LogEvent]
    grades: list[GradeRecord]
    latent: dict[str, float]
    archetype_of: dict[str, str]


# ---------------------------------------------------------------------------
# Pipeline options
# ---------------------------------------------------------------------------


LOG_FIELDS = ("time", "user", "event_context", "component", "event_name", "description")


class PipelineOptions(BaseModel):
    """Everything the score, course-wide and evaluate pipelines need besides the data"""

    calendar: CourseCalendar = Field(default_factory=CourseCalendar)
    rules: ChapterRules = Field(default_factory=ChapterRules)
    columns: ColumnMapping = Field(default_factory=ColumnMapping)
    timestamp_format: str = "%Y-%m-%d %H:%M"
    delimiter: str = Field(",", min_length=1, max_length=1)
    strict: bool = True
    threshold_minutes: float | None = Field(default=None, gt=0, le=120)
    max_gap_minutes: float = Field(120.0, gt=0, le=120)
    gap_percentile: int = Field(95, ge=1, le=100)
    chapter_weights: list[float] | None = None
    coursewide_weights: CourseWideWeights = Field(default_factory=CourseWideWeights)
    evaluation: EvaluationSettings = Field(default_factory=EvaluationSettings)
    activity_key: tuple[str, ...] = ("event_context",)

    @field_validator("activity_key")
    @classmethod
    def _known_columns(cls, value: tuple[str, ...]) -> tuple[str, ...]:
        unknown = [c for c in value if c not in LOG_FIELDS]
        if not value or unknown:
            raise ValueError(f"activity_key must name log fields from {LOG_FIELDS}, got {list(value)}")
        return value

    @field_validator("chapter_weights")
    @classmethod
    def _non_negative(cls, value: list[float] | None) -> list[float] | None:
        if value is not None and any(w < 0 for w in value):
            raise ValueError("chapter weights must be non-negative")
        return value


# ---------------------------------------------------------------------------
# Use-case results
# ---------------------------------------------------------------------------


class ScoreRun(BaseModel):
    """Everything the score use case produces for one as-of week"""

    as_of_week: int
    threshold: GapThreshold
    cohort: list[str]
    excluded_users: list[str]
    rejected_rows: int
    sessions: list[Session]
    engagement: WeeklyEngagement


class ScoreManifest(BaseModel):
    """Run metadata written next to the score tables"""

    as_of_week: int
    weeks: list[int]
    threshold: GapThreshold
    cohort_size: int
    excluded_users: int
    rejected_rows: int
    sessions: int
    general_only_sessions: int
    weights: list[float]
    releases: list[ChapterRelease]


class SimulationManifest(BaseModel):
    seed: int
    cohort_size: int
    events: int
    excluded_users: int
    archetype_counts: dict[str, int]
    calendar: CourseCalendar
    config: SimulationConfig


class CourseWideRun(BaseModel):
    threshold: GapThreshold
    cohort: list[str]
    excluded_users: list[str]
    weights: CourseWideWeights
    indicators: list[CourseWideIndicators]


# ---------------------------------------------------------------------------
# HTTP responses
# ---------------------------------------------------------------------------


class WeeklyScoreRow(BaseModel):
    user: str
    week: int
    score: float


class ScoreResponse(BaseModel):
    """Weekly scores of a cohort scored over HTTP"""

    as_of_week: int
    threshold_minutes: float
    threshold_source: ThresholdSource
    cohort_size: int
    releases: list[ChapterRelease]
    scores: list[WeeklyScoreRow]

    class Config:
        json_schema_extra = {
            "example": {
                "as_of_week": 3,
                "threshold_minutes": 12.0,
                "threshold_source": "computed",
                "cohort_size": 2,
                "releases": [{"chapter": 1, "release_day": 0, "observed_from": 1}],
                "scores": [{"user": "s001", "week": 1, "score": 2.5}],
            }
        }


class ErrorResponse(BaseModel):
    """Standard error response"""
    detail: str = Field(
        ...,
        description="Error message"
    )
    error_code: str | None = Field(
        default=None,
        description="Machine-readable error code"
    )

    class Config:
        json_schema_extra = {
            "example": {
                "detail": "Log.csv: required column 'Event.name' not found in header",
                "error_code": "MISSING_COLUMN"
            }
        }
