"""CSV Log Reader - pandas implementation of IActivityLogSource"""
import logging
from pathlib import Path

import pandas as pd

from app.domain.errors import BadGrade, BadTimestamp, EmptyUser, InputError, MissingColumn, MissingGrades
from app.domain.ports.activity_log_source import IActivityLogSource, Source
from app.domain.schemas import ColumnMapping, GradeRecord, LogEvent, ParsedLog, RejectedRow

logger = logging.getLogger(__name__)

GRADE_USER = "user"
GRADE_FINAL = "final_grade"
GRADE_EXAM = "exam_grade"


def _source_name(source: Source) -> str:
    if isinstance(source, (str, Path)):
        return str(source)
    name = getattr(source, "name", None)
    return name if isinstance(name, str) else "<stream>"


def _read_frame(source: Source, delimiter: str, name: str) -> pd.DataFrame:
    try:
        return pd.read_csv(
            source,
            sep=delimiter,
            dtype=str,
            keep_default_na=False,
            encoding="utf-8",
        )
    except pd.errors.EmptyDataError:
        raise InputError(f"{name}: file is empty (no header row)")
    except pd.errors.ParserError as e:
        raise InputError(f"{name}: malformed delimited text: {e}")


class CsvActivityLogSource(IActivityLogSource):
    """
    Activity-log and grade reader for delimiter-separated exports.

    Every cell is read as text so the mapping to domain types stays explicit:
    timestamps go through the configured format, users are stripped.
    """

    def parse_log(
        self,
        source: Source,
        columns: ColumnMapping,
        timestamp_format: str,
        delimiter: str = ",",
        strict: bool = True,
    ) -> ParsedLog:
        name = _source_name(source)
        frame = _read_frame(source, delimiter, name)

        mapping = columns.model_dump()
        for header in mapping.values():
            if header not in frame.columns:
                raise MissingColumn(header, name)

        raw_times = frame[columns.time]
        times = pd.to_datetime(raw_times, format=timestamp_format, errors="coerce")
        users = frame[columns.user].str.strip()

        bad_time = times.isna().to_numpy()
        bad_user = (users == "").to_numpy()
        rejected: list[RejectedRow] = []

        for row_index in (bad_time | bad_user).nonzero()[0]:
            row_index = int(row_index)
            if strict:
                if bad_time[row_index]:
                    raise BadTimestamp(row_index, raw_times.iloc[row_index], name)
                raise EmptyUser(row_index, name)
            reason = "bad timestamp" if bad_time[row_index] else "empty user"
            rejected.append(RejectedRow(row_index=row_index, reason=reason))

        if rejected:
            logger.warning(f"⚠️ {name}: rejected {len(rejected)} malformed rows")

        keep = ~(bad_time | bad_user)
        kept = frame.loc[keep].assign(_time=times[keep], _user=users[keep])
        kept = kept.sort_values("_time", kind="mergesort")

        events = [
            LogEvent(
                time=timestamp.to_pydatetime(),
                user=user,
                event_context=context,
                component=component,
                event_name=event_name,
                description=description,
            )
            for timestamp, user, context, component, event_name, description in zip(
                kept["_time"],
                kept["_user"],
                kept[columns.event_context],
                kept[columns.component],
                kept[columns.event_name],
                kept[columns.description],
            )
        ]

        logger.info(f"✓ Parsed {len(events)} events from {name}")
        return ParsedLog(events=events, rejected=rejected)

    def read_grades(self, source: Source, delimiter: str = ",") -> list[GradeRecord]:
        name = _source_name(source)
        if isinstance(source, (str, Path)) and not Path(source).exists():
            raise MissingGrades(f"grades file not found: {name}")

        frame = _read_frame(source, delimiter, name)
        for header in (GRADE_USER, GRADE_FINAL):
            if header not in frame.columns:
                raise MissingColumn(header, name)

        final = pd.to_numeric(frame[GRADE_FINAL], errors="coerce")
        if GRADE_EXAM in frame.columns:
            exam_text = frame[GRADE_EXAM].str.strip()
            exam = pd.to_numeric(exam_text, errors="coerce")
        else:
            exam_text = pd.Series([""] * len(frame), index=frame.index)
            exam = pd.Series([float("nan")] * len(frame), index=frame.index)

        records: list[GradeRecord] = []
        for row_index, (user, grade, exam_raw, exam_grade) in enumerate(
            zip(frame[GRADE_USER].str.strip(), final, exam_text, exam)
        ):
            if not user:
                raise EmptyUser(row_index, name)
            if pd.isna(grade) or not 0 <= grade <= 100:
                raise BadGrade(row_index, f"final_grade {frame[GRADE_FINAL].iloc[row_index]!r} not in [0, 100]", name)
            if exam_raw and (pd.isna(exam_grade) or not 0 <= exam_grade <= 100):
                raise BadGrade(row_index, f"exam_grade {exam_raw!r} not in [0, 100]", name)
            records.append(
                GradeRecord(
                    user=user,
                    final_grade=float(grade),
                    exam_grade=None if not exam_raw else float(exam_grade),
                )
            )

        logger.info(f"✓ Read {len(records)} grade records from {name}")
        return records
