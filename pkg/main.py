"""Main FastAPI application entry point."""

import logging
from contextlib import asynccontextmanager

from fastapi import FastAPI

from config import settings
from app.models.responses import HealthCheckResponse

# Configure logging
logging.basicConfig(
    level=logging.INFO if not settings.app_debug else logging.DEBUG,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)

logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    """
    Lifespan context manager for startup and shutdown events.
    Prepares the results directory.
    """
    # Startup
    logger.info("Starting two-way relay density evolution API")
    try:
        settings.results_path.mkdir(parents=True, exist_ok=True)
        logger.info(f"Results directory ready at {settings.results_path}")
    except OSError as e:
        logger.warning(f"Could not create results directory: {e}")

    yield

    # Shutdown
    logger.info("Shutting down two-way relay density evolution API")


# Create FastAPI application
app = FastAPI(
    title="Two-Way Relay LDPC Density Evolution",
    description="Symmetric information rates, population-dynamics DE, BP thresholds and finite-length BP checks",
    version=settings.app_version,
    lifespan=lifespan,
    debug=settings.app_debug
)


# Import and include routers
# Note: Import here to avoid circular dependencies
try:
    from app.api.routes import density_evolution, ensembles, simulations, sir, thresholds

    app.include_router(
        sir.router,
        prefix=f"{settings.api_prefix}/sir",
        tags=["Channel"]
    )

    app.include_router(
        ensembles.router,
        prefix=f"{settings.api_prefix}/ensembles",
        tags=["Ensembles"]
    )

    app.include_router(
        density_evolution.router,
        prefix=f"{settings.api_prefix}/density-evolution",
        tags=["Density Evolution"]
    )

    app.include_router(
        thresholds.router,
        prefix=f"{settings.api_prefix}/thresholds",
        tags=["Thresholds"]
    )

    app.include_router(
        simulations.router,
        prefix=f"{settings.api_prefix}/simulations",
        tags=["Simulations"]
    )

    logger.info("API routes registered successfully")

except ImportError as e:
    logger.warning(f"Some routes not available: {e}")


@app.get("/health", response_model=HealthCheckResponse, tags=["System"])
async def health_check():
    """
    Health check endpoint.

    Returns service status and worker configuration.
    """
    return HealthCheckResponse(
        status="healthy",
        version=settings.app_version,
        worker_threads=settings.worker_threads
    )


@app.get("/", tags=["System"])
async def root():
    """Root endpoint with API information."""
    return {
        "service": "Two-Way Relay LDPC Density Evolution",
        "version": settings.app_version,
        "docs": "/docs",
        "health": "/health"
    }


if __name__ == "__main__":
    import uvicorn

    uvicorn.run(
        "main:app",
        host=settings.app_host,
        port=settings.app_port,
        reload=settings.app_debug,
        log_level="debug" if settings.app_debug else "info"
    )
