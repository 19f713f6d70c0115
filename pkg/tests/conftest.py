"""Shared fixtures for unit and integration tests"""
from pathlib import Path

import pytest

from app.domain.schemas import ChapterRules, CourseCalendar, PipelineOptions
from app.infrastructure.readers.csv_log_reader import CsvActivityLogSource
from tests.builders import TERM_START, write_grades, write_log


@pytest.fixture
def calendar() -> CourseCalendar:
    return CourseCalendar(term_start=TERM_START, num_weeks=11, week_length_days=7)


@pytest.fixture
def rules() -> ChapterRules:
    return ChapterRules()


@pytest.fixture
def options(calendar: CourseCalendar) -> PipelineOptions:
    return PipelineOptions(calendar=calendar)


@pytest.fixture
def log_source() -> CsvActivityLogSource:
    return CsvActivityLogSource()


@pytest.fixture
def three_student_log(tmp_path: Path) -> Path:
    """Three students over the first two weeks; two chapters plus forum activity"""
    rows = [
        ("2022-09-26 09:00", "s001", "Chapter 1 Notes", "File", "Course module viewed", "view"),
        ("2022-09-26 09:03", "s001", "Chapter 1 Quiz", "Quiz", "Course module viewed", "view"),
        ("2022-09-26 09:05", "s001", "Course forum", "Forum", "Course module viewed", "view"),
        ("2022-09-27 10:00", "s002", "Chapter 1 Notes", "File", "Course module viewed", "view"),
        ("2022-09-27 10:02", "s002", "Chapter 1 Notes", "File", "Course module viewed", "view"),
        ("2022-09-29 18:00", "s001", "Chapter 1 Slides", "File", "Course module viewed", "view"),
        ("2022-10-01 11:00", "s003", "Course forum", "Forum", "Course module viewed", "view"),
        ("2022-10-01 11:04", "s003", "Chapter 1 Notes", "File", "Course module viewed", "view"),
        ("2022-10-03 09:00", "s001", "Chapter 2 Notes", "File", "Course module viewed", "view"),
        ("2022-10-03 09:02", "s001", "Chapter 2 Video", "Page", "Course module viewed", "view"),
        ("2022-10-04 14:00", "s002", "Chapter 2 Notes", "File", "Course module viewed", "view"),
        ("2022-10-06 20:00", "s003", "Chapter 2 Notes", "File", "Course module viewed", "view"),
        ("2022-10-06 20:06", "s003", "Chapter 2 Notes", "File", "Course module viewed", "view"),
    ]
    return write_log(tmp_path / "log.csv", rows)


@pytest.fixture
def three_student_grades(tmp_path: Path) -> Path:
    return write_grades(tmp_path / "grades.csv", {"s001": 72.0, "s002": 55.0, "s003": 41.0})
