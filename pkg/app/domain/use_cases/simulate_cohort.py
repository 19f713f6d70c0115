"""Simulate Cohort Use Case - Write a seeded synthetic course"""
import logging

from app.domain.ports.report_store import IReportStore
from app.domain.schemas import CourseCalendar, SimulatedCohort, SimulationConfig
from app.domain.services.cohort_sim import generate_cohort

logger = logging.getLogger(__name__)


class SimulateCohortUseCase:
    def __init__(self, report_store: IReportStore):
        self.report_store = report_store

    def execute(self, calendar: CourseCalendar, config: SimulationConfig) -> SimulatedCohort:
        """
        Generate a cohort and persist its log, grades and latent engagement.

        Raises:
            InvalidConfig: Invalid archetype mix or release schedule
        """
        cohort = generate_cohort(calendar, config)
        self.report_store.save_simulation(cohort, config, calendar)
        return cohort
