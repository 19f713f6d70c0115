"""Activity Log Source Port - Contract for reading VLE logs and grade sheets"""
from abc import ABC, abstractmethod
from pathlib import Path
from typing import BinaryIO

from app.domain.schemas import ColumnMapping, GradeRecord, ParsedLog

Source = str | Path | BinaryIO


class IActivityLogSource(ABC):
    """
    Port (interface) for loading raw course data.

    Implementations may read local CSV exports, uploaded files or any other
    delimiter-separated stream.
    """

    @abstractmethod
    def parse_log(
        self,
        source: Source,
        columns: ColumnMapping,
        timestamp_format: str,
        delimiter: str = ",",
        strict: bool = True,
    ) -> ParsedLog:
        """
        Parse an activity log into time-ordered events.

        Args:
            source: Path or binary stream with a header row
            columns: Header names of the six log columns
            timestamp_format: strftime pattern of the Time column
            delimiter: Field separator
            strict: Raise on the first bad row instead of rejecting it

        Returns:
            ParsedLog with events sorted by time (stable) and rejected rows

        Raises:
            MissingColumn: A mapped column is absent from the header
            BadTimestamp: Unparseable Time value (strict mode)
            EmptyUser: Blank User value (strict mode)
        """
        pass

    @abstractmethod
    def read_grades(self, source: Source, delimiter: str = ",") -> list[GradeRecord]:
        """
        Read a grade sheet with columns user, final_grade and optional exam_grade.

        Raises:
            MissingGrades: Grade source not found
            MissingColumn: Required grade column absent
        """
        pass
