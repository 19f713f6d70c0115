"""Health Check Routes - Liveness and readiness of the analytics API"""
import logging
from collections.abc import Callable

from fastapi import APIRouter, status
from fastapi.responses import JSONResponse

from app.config import settings

logger = logging.getLogger(__name__)


def create_health_router(wired_endpoints: Callable[[], list[str]] = lambda: []) -> APIRouter:
    """
    Factory function to create health check router.

    Args:
        wired_endpoints: Returns the analytics endpoints registered so far

    Returns:
        APIRouter with /health and /ready
    """
    router = APIRouter(prefix="", tags=["health"])

    @router.get("/health")
    async def health_check() -> dict:
        """Liveness plus the session defaults every request starts from."""
        return {
            "status": "healthy",
            "app": settings.APP_NAME,
            "max_gap_minutes": settings.MAX_GAP_MINUTES,
            "gap_percentile": settings.GAP_PERCENTILE,
        }

    @router.get("/ready")
    async def ready_check():
        endpoints = wired_endpoints()
        ready = bool(endpoints)
        if not ready:
            logger.warning("⚠️ Readiness check before analytics routes were registered")
        return JSONResponse(
            status_code=status.HTTP_200_OK if ready else status.HTTP_503_SERVICE_UNAVAILABLE,
            content={"ready": ready, "endpoints": endpoints, "version": settings.APP_VERSION},
        )

    return router
