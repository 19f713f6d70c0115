"""Analytics Routes - HTTP endpoints for scoring and evaluating uploaded course data"""
import io
import logging

from fastapi import APIRouter, File, Form, UploadFile, status
from fastapi.concurrency import run_in_threadpool
from fastapi.responses import JSONResponse

from app.domain.errors import EngagementError
from app.domain.schemas import (
    ErrorResponse,
    EvaluationReport,
    PipelineOptions,
    ScoreResponse,
    ScoreRun,
    WeeklyScoreRow,
)
from app.domain.use_cases.evaluate_cohort import EvaluateCohortUseCase
from app.domain.use_cases.score_cohort import ScoreCohortUseCase
from app.domain.use_cases.score_coursewide import ScoreCourseWideUseCase

logger = logging.getLogger(__name__)


def _error(status_code: int, detail: str, error_code: str | None = None) -> JSONResponse:
    return JSONResponse(
        status_code=status_code,
        content=ErrorResponse(detail=detail, error_code=error_code).model_dump(),
    )


def _handle(e: Exception) -> JSONResponse:
    if isinstance(e, EngagementError) and isinstance(e, ValueError):
        logger.warning(f"⚠️  Rejected request: {e}")
        return _error(status.HTTP_400_BAD_REQUEST, str(e), e.error_code)
    if isinstance(e, ValueError):
        logger.warning(f"⚠️  Validation error: {e}")
        return _error(status.HTTP_400_BAD_REQUEST, str(e), "VALIDATION_ERROR")
    if isinstance(e, RuntimeError):
        logger.error(f"✗ Runtime error: {e}")
        return _error(
            status.HTTP_500_INTERNAL_SERVER_ERROR,
            "Failed to process request. Check server logs.",
            getattr(e, "error_code", None),
        )
    logger.error(f"✗ Unexpected error: {e}", exc_info=True)
    return _error(status.HTTP_500_INTERNAL_SERVER_ERROR, "An unexpected error occurred")


async def _buffer(upload: UploadFile) -> io.BytesIO:
    data = io.BytesIO(await upload.read())
    data.name = upload.filename or "<upload>"
    return data


def _copy(buffer: io.BytesIO | None) -> io.BytesIO | None:
    if buffer is None:
        return None
    copy = io.BytesIO(buffer.getvalue())
    copy.name = buffer.name
    return copy


def _options(config: str | None) -> PipelineOptions:
    return PipelineOptions.model_validate_json(config) if config else PipelineOptions()


def _score_response(run: ScoreRun) -> ScoreResponse:
    rows = [
        WeeklyScoreRow(user=series.user, week=week, score=series.scores[week])
        for series in sorted(run.engagement.series, key=lambda s: s.user)
        for week in run.engagement.weeks
    ]
    return ScoreResponse(
        as_of_week=run.as_of_week,
        threshold_minutes=run.threshold.minutes,
        threshold_source=run.threshold.source,
        cohort_size=len(run.cohort),
        releases=run.engagement.releases,
        scores=rows,
    )


def create_analytics_router(
    score_use_case: ScoreCohortUseCase,
    coursewide_use_case: ScoreCourseWideUseCase,
    evaluate_use_case: EvaluateCohortUseCase,
) -> APIRouter:
    """
    Factory function to create the analytics router with injected dependencies.

    Args:
        score_use_case: Weekly chapter metric
        coursewide_use_case: Course-wide baseline
        evaluate_use_case: Evaluation against grades

    Returns:
        APIRouter with /score and /evaluate
    """
    router = APIRouter(prefix="", tags=["analytics"])
    error_responses = {
        400: {"model": ErrorResponse, "description": "Invalid input or configuration"},
        500: {"model": ErrorResponse, "description": "Server error"},
    }

    @router.post("/score", response_model=ScoreResponse, responses=error_responses)
    async def score(
        log: UploadFile = File(..., description="Activity log CSV"),
        grades: UploadFile | None = File(default=None, description="Grade sheet CSV"),
        config: str | None = Form(default=None, description="Pipeline options as JSON"),
        as_of_week: int | None = Form(default=None),
    ):
        """Weekly chapter-aligned scores of an uploaded log up to the as-of week."""
        try:
            options = _options(config)
            log_data = await _buffer(log)
            grades_data = await _buffer(grades) if grades is not None else None
            week = as_of_week if as_of_week is not None else options.calendar.num_weeks

            logger.info(f"📝 Score request: {log_data.name} up to week {week}")
            run = await run_in_threadpool(score_use_case.execute, log_data, grades_data, options, week)
            logger.info(f"✓ Scored {len(run.cohort)} students")
            return _score_response(run)
        except Exception as e:
            return _handle(e)

    @router.post("/evaluate", response_model=EvaluationReport, responses=error_responses)
    async def evaluate(
        log: UploadFile = File(..., description="Activity log CSV"),
        grades: UploadFile = File(..., description="Grade sheet CSV"),
        config: str | None = Form(default=None, description="Pipeline options as JSON"),
        as_of_week: int | None = Form(default=None),
    ):
        """Full evaluation of an uploaded course: weekly scores, baseline and grades."""
        try:
            options = _options(config)
            log_data = await _buffer(log)
            grades_data = await _buffer(grades)
            week = as_of_week if as_of_week is not None else options.calendar.num_weeks

            def pipeline() -> EvaluationReport:
                run = score_use_case.execute(_copy(log_data), _copy(grades_data), options, week)
                baseline = coursewide_use_case.execute(_copy(log_data), _copy(grades_data), options)
                records = evaluate_use_case.log_source.read_grades(_copy(grades_data), delimiter=options.delimiter)
                return evaluate_use_case.evaluate(run.engagement, baseline.indicators, records, options.evaluation)

            logger.info(f"📝 Evaluate request: {log_data.name} up to week {week}")
            report = await run_in_threadpool(pipeline)
            logger.info(f"✓ Evaluated {report.cohort.total} students")
            return report
        except Exception as e:
            return _handle(e)

    return router
