"""Scenarios router — run a scenario end to end and record it."""

import json

from fastapi import APIRouter, Depends
from sqlalchemy.ext.asyncio import AsyncSession
from starlette.concurrency import run_in_threadpool

from app.database import get_db
from app.errors import SimulatorError
from app.models.run import RunRecord
from app.routers import http_error
from app.schemas.scenario import RunReport, Scenario
from app.services.scenario_runner import run_scenario

router = APIRouter(prefix="/scenarios", tags=["scenarios"])


@router.post("/run")
async def run(scenario: Scenario, db: AsyncSession = Depends(get_db)):
    """Execute the scenario (no artefact files) and store a run record."""
    try:
        report: RunReport = await run_in_threadpool(run_scenario, scenario)
    except SimulatorError as e:
        raise http_error(e)

    golden = report.functional.golden
    record = RunRecord(
        scenario=report.scenario,
        benchmark=report.benchmark,
        mode=report.mode.value,
        crc_ok_cif=report.functional.crc_ok_cif,
        crc_ok_lcd=report.functional.crc_ok_lcd,
        golden_match=None if golden is None else golden.passed,
        latency_ms=report.performance.latency * 1e3,
        throughput_fps=report.performance.throughput,
        checksum=report.functional.output_checksum,
        report_json=json.dumps(report.model_dump(mode="json"), sort_keys=True),
    )
    db.add(record)
    await db.flush()
    return {"run_id": record.id, "passed": report.passed, "report": report.model_dump(mode="json")}
