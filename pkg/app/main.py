"""
cifsim — FastAPI application entry-point.

Run with:
    uvicorn app.main:app --reload
"""

from contextlib import asynccontextmanager

from fastapi import FastAPI

from app.config import settings
from app.database import init_registry

# ── Import routers ──
from app.routers import bus, runs, scenarios, table2


# ── Lifespan: create the run registry on startup ──
@asynccontextmanager
async def lifespan(app: FastAPI):
    await init_registry()
    yield


app = FastAPI(
    title=settings.APP_NAME,
    description="FPGA & VPU CIF/LCD co-processing simulator — bus protocol, VPU kernels and pipeline timing.",
    version="0.1.0",
    lifespan=lifespan,
)

# ── Register API routers ──
app.include_router(scenarios.router)
app.include_router(runs.router)
app.include_router(table2.router)
app.include_router(bus.router)


@app.get("/")
async def index():
    return {
        "app": settings.APP_NAME,
        "routes": ["/scenarios/run", "/runs", "/table2", "/table2/html", "/bus/transfer-time"],
    }
