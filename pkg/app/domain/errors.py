"""Domain Errors - Exception hierarchy shared by services, use cases and adapters"""


class EngagementError(Exception):
    """
    Base class for every error raised by the engagement pipeline.

    Each subclass carries the process exit code the CLI reports for it.
    """

    exit_code: int = 3
    error_code: str = "ENGAGEMENT_ERROR"


class InputError(EngagementError, ValueError):
    """Bad or inconsistent input data (logs, grades, score tables)"""

    exit_code = 1
    error_code = "INPUT_ERROR"


class ConfigError(EngagementError, ValueError):
    """Invalid run configuration"""

    exit_code = 2
    error_code = "CONFIG_ERROR"


class InvariantViolation(EngagementError, RuntimeError):
    """An internal invariant did not hold"""

    exit_code = 3
    error_code = "INVARIANT_VIOLATION"


# --- ingest -----------------------------------------------------------------


class MissingColumn(InputError):
    error_code = "MISSING_COLUMN"

    def __init__(self, column: str, source: str = "<stream>"):
        self.column = column
        self.source = source
        super().__init__(f"{source}: required column '{column}' not found in header")


class BadTimestamp(InputError):
    error_code = "BAD_TIMESTAMP"

    def __init__(self, row_index: int, raw: str, source: str = "<stream>"):
        self.row_index = row_index
        self.raw = raw
        self.source = source
        # +2: header line plus 1-based numbering
        super().__init__(
            f"{source}:{row_index + 2}: cannot parse timestamp {raw!r} (data row {row_index})"
        )


class EmptyUser(InputError):
    error_code = "EMPTY_USER"

    def __init__(self, row_index: int, source: str = "<stream>"):
        self.row_index = row_index
        self.source = source
        super().__init__(f"{source}:{row_index + 2}: empty user identifier (data row {row_index})")


class DuplicateUser(InputError):
    error_code = "DUPLICATE_USER"

    def __init__(self, user: str, grades: tuple):
        self.user = user
        super().__init__(f"user '{user}' has conflicting grade records: {grades}")


class BadGrade(InputError):
    error_code = "BAD_GRADE"

    def __init__(self, row_index: int, detail: str, source: str = "<stream>"):
        self.row_index = row_index
        self.source = source
        super().__init__(f"{source}:{row_index + 2}: {detail} (data row {row_index})")


class MissingGrades(InputError):
    error_code = "MISSING_GRADES"


class MissingGrade(InputError):
    error_code = "MISSING_GRADE"

    def __init__(self, user: str):
        self.user = user
        super().__init__(f"no grade recorded for user '{user}'")


class CohortMismatch(InputError):
    error_code = "COHORT_MISMATCH"

    def __init__(self, users: list[str], detail: str):
        self.users = users
        shown = ", ".join(users[:10]) + (" ..." if len(users) > 10 else "")
        super().__init__(f"{detail}: {shown}")


# --- sessionizer ------------------------------------------------------------


class InsufficientData(InputError):
    error_code = "INSUFFICIENT_DATA"


# --- metrics ----------------------------------------------------------------


class EmptyPopulation(InvariantViolation):
    error_code = "EMPTY_POPULATION"


class WeightMismatch(ConfigError):
    error_code = "WEIGHT_MISMATCH"


class EmptySubset(ConfigError):
    error_code = "EMPTY_SUBSET"


# --- evaluation -------------------------------------------------------------


class DegenerateInput(InputError):
    error_code = "DEGENERATE_INPUT"


class TooFewStudents(InputError):
    error_code = "TOO_FEW_STUDENTS"


class SingleClass(InputError):
    error_code = "SINGLE_CLASS"


# --- simulation -------------------------------------------------------------


class InvalidConfig(ConfigError):
    error_code = "INVALID_CONFIG"
