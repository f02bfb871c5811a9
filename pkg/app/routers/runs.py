"""Runs router — the run registry."""

import json

from fastapi import APIRouter, Depends, HTTPException
from sqlalchemy import desc, select
from sqlalchemy.ext.asyncio import AsyncSession

from app.database import get_db
from app.models.run import RunRecord

router = APIRouter(prefix="/runs", tags=["runs"])


def _summary(r: RunRecord) -> dict:
    return {
        "id": r.id,
        "scenario": r.scenario,
        "benchmark": r.benchmark,
        "mode": r.mode,
        "crc_ok_cif": r.crc_ok_cif,
        "crc_ok_lcd": r.crc_ok_lcd,
        "golden_match": r.golden_match,
        "latency_ms": r.latency_ms,
        "throughput_fps": r.throughput_fps,
        "checksum": r.checksum,
        "created_at": r.created_at.isoformat() if r.created_at else "",
    }


@router.get("")
async def list_runs(limit: int = 50, db: AsyncSession = Depends(get_db)):
    result = await db.execute(select(RunRecord).order_by(desc(RunRecord.id)).limit(limit))
    return [_summary(r) for r in result.scalars().all()]


@router.get("/{run_id}")
async def get_run(run_id: int, db: AsyncSession = Depends(get_db)):
    record = await db.get(RunRecord, run_id)
    if not record:
        raise HTTPException(status_code=404, detail="Run not found")
    return {**_summary(record), "report": json.loads(record.report_json)}
