"""Dependency Injection - Container and factory for creating use cases with dependencies"""
import logging

from app.domain.ports.activity_log_source import IActivityLogSource
from app.domain.ports.report_store import IReportStore
from app.domain.use_cases.evaluate_cohort import EvaluateCohortUseCase
from app.domain.use_cases.score_cohort import ScoreCohortUseCase
from app.domain.use_cases.score_coursewide import ScoreCourseWideUseCase
from app.domain.use_cases.simulate_cohort import SimulateCohortUseCase

logger = logging.getLogger(__name__)


class ServiceContainer:
    """
    Service container for managing application dependencies.

    Implements the service locator pattern to provide instances
    of use cases with their dependencies properly injected.
    """

    def __init__(
        self,
        log_source: IActivityLogSource,
        report_store: IReportStore | None = None,
    ):
        """
        Initialize service container with adapters.

        Args:
            log_source: Implementation of IActivityLogSource
            report_store: Implementation of IReportStore (None keeps results in memory)
        """
        self._log_source = log_source
        self._report_store = report_store

    def _require_store(self, use_case: str) -> IReportStore:
        if self._report_store is None:
            raise RuntimeError(f"{use_case} needs a report store")
        return self._report_store

    def get_score_cohort_use_case(self) -> ScoreCohortUseCase:
        logger.debug("Creating ScoreCohortUseCase instance")
        return ScoreCohortUseCase(log_source=self._log_source, report_store=self._report_store)

    def get_score_coursewide_use_case(self) -> ScoreCourseWideUseCase:
        logger.debug("Creating ScoreCourseWideUseCase instance")
        return ScoreCourseWideUseCase(log_source=self._log_source, report_store=self._report_store)

    def get_evaluate_cohort_use_case(self) -> EvaluateCohortUseCase:
        logger.debug("Creating EvaluateCohortUseCase instance")
        return EvaluateCohortUseCase(log_source=self._log_source, report_store=self._report_store)

    def get_simulate_cohort_use_case(self) -> SimulateCohortUseCase:
        """
        Get SimulateCohortUseCase with its store injected.

        Raises:
            RuntimeError: Container built without a report store
        """
        logger.debug("Creating SimulateCohortUseCase instance")
        return SimulateCohortUseCase(report_store=self._require_store("simulation"))
