"""Report Store Port - Contract for persisting pipeline artifacts"""
from abc import ABC, abstractmethod
from pathlib import Path

from app.domain.schemas import (
    CourseCalendar,
    CourseWideIndicators,
    CourseWideRun,
    EvaluationReport,
    ScoreRun,
    SimulatedCohort,
    SimulationConfig,
    WeeklyEngagement,
)


class IReportStore(ABC):
    """
    Port (interface) for writing and reading back run artifacts.

    Every save must be deterministic: the same inputs give byte-identical files.
    """

    @abstractmethod
    def save_score_run(self, run: ScoreRun) -> list[Path]:
        """Write weekly scores, indicator decomposition, sessions and the run manifest"""
        pass

    @abstractmethod
    def save_coursewide(self, run: CourseWideRun) -> list[Path]:
        """Write the course-wide indicator table"""
        pass

    @abstractmethod
    def save_report(self, report: EvaluationReport) -> list[Path]:
        """Write the JSON report and its per-series CSV tables"""
        pass

    @abstractmethod
    def save_simulation(
        self,
        cohort: SimulatedCohort,
        config: SimulationConfig,
        calendar: CourseCalendar,
    ) -> list[Path]:
        """Write the synthetic log, grades, latent engagement and manifest"""
        pass

    @abstractmethod
    def load_weekly_scores(self) -> WeeklyEngagement:
        """
        Read weekly scores written by save_score_run.

        Raises:
            FileNotFoundError: No score table in the store
        """
        pass

    @abstractmethod
    def load_coursewide(self) -> list[CourseWideIndicators]:
        """
        Read the course-wide table written by save_coursewide.

        Raises:
            FileNotFoundError: No course-wide table in the store
        """
        pass

    @abstractmethod
    def load_report(self) -> EvaluationReport:
        """
        Read the JSON report written by save_report.

        Raises:
            FileNotFoundError: No report in the store
        """
        pass
