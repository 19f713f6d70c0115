"""Main Application - FastAPI Setup and Startup"""
import logging
from contextlib import asynccontextmanager

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from app.config import settings
from app.di import ServiceContainer
from app.infrastructure.readers.csv_log_reader import CsvActivityLogSource
from app.presentation.routes import create_analytics_router, create_health_router

logging.basicConfig(
    level=settings.LOG_LEVEL,
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
)
logger = logging.getLogger(__name__)


# Set once by lifespan; requests never write artifacts, so no report store
service_container: ServiceContainer | None = None
_analytics_paths: list[str] = []


def _wired_endpoints() -> list[str]:
    return list(_analytics_paths)


def _register_analytics(app: FastAPI, container: ServiceContainer) -> None:
    router = create_analytics_router(
        score_use_case=container.get_score_cohort_use_case(),
        coursewide_use_case=container.get_score_coursewide_use_case(),
        evaluate_use_case=container.get_evaluate_cohort_use_case(),
    )
    app.include_router(router, prefix=settings.API_PREFIX)
    _analytics_paths.extend(f"{settings.API_PREFIX}{route.path}" for route in router.routes)
    logger.info(f"✓ Analytics endpoints: {', '.join(_analytics_paths)}")


@asynccontextmanager
async def lifespan(app: FastAPI):
    global service_container
    logger.info(
        f"🚀 Starting {settings.APP_NAME} "
        f"(gap cap {settings.MAX_GAP_MINUTES:g} min, p{settings.GAP_PERCENTILE})"
    )

    try:
        if service_container is None:
            service_container = ServiceContainer(log_source=CsvActivityLogSource())
            _register_analytics(app, service_container)
        logger.info("✅ Ready to score uploaded activity logs")
    except Exception as e:
        logger.error(f"❌ Failed to wire analytics use cases: {str(e)}")
        raise

    yield

    logger.info(f"🛑 Shutting down {settings.APP_NAME}...")


app = FastAPI(
    title=settings.APP_NAME,
    version=settings.APP_VERSION,
    description="Chapter-aligned weekly engagement scores and their evaluation from VLE activity logs",
    debug=settings.DEBUG,
    lifespan=lifespan,
)

app.include_router(create_health_router(_wired_endpoints))

app.add_middleware(
    CORSMiddleware,
    allow_origins=settings.cors_origins,
    allow_credentials=settings.cors_origins != ["*"],
    allow_methods=["GET", "POST"],
    allow_headers=["*"],
)


if __name__ == "__main__":
    import uvicorn

    uvicorn.run(
        "app.main:app",
        host="0.0.0.0",
        port=8000,
        reload=settings.DEBUG,
        log_level=settings.LOG_LEVEL.lower(),
    )
