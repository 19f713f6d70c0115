"""Use Cases - Application business logic"""
from .evaluate_cohort import EvaluateCohortUseCase
from .score_cohort import ScoreCohortUseCase
from .score_coursewide import ScoreCourseWideUseCase
from .simulate_cohort import SimulateCohortUseCase

__all__ = [
    "EvaluateCohortUseCase",
    "ScoreCohortUseCase",
    "ScoreCourseWideUseCase",
    "SimulateCohortUseCase",
]
