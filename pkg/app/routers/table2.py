"""Table II router — JSON and HTML renderings of the reproduction."""

from pathlib import Path
from typing import List, Literal, Optional

from fastapi import APIRouter, Query, Request
from fastapi.templating import Jinja2Templates

from app.config import settings
from app.errors import SimulatorError
from app.routers import http_error
from app.services.table2 import reproduce_table2

router = APIRouter(prefix="/table2", tags=["table2"])
templates = Jinja2Templates(directory=str(Path(__file__).resolve().parent.parent / "templates"))


def _reproduce(source: str, benchmark: Optional[List[str]]):
    try:
        return reproduce_table2(source=source, benchmarks=benchmark, dataset_path=settings.TABLE2_DATASET or None)
    except SimulatorError as e:
        raise http_error(e)


@router.get("")
async def table2_json(
    source: Literal["paper", "derived"] = "paper",
    benchmark: Optional[List[str]] = Query(None),
):
    table = _reproduce(source, benchmark)
    return {**table.model_dump(mode="json"), "all_within_tolerance": table.all_within_tolerance}


@router.get("/html")
async def table2_html(
    request: Request,
    source: Literal["paper", "derived"] = "paper",
    benchmark: Optional[List[str]] = Query(None),
):
    table = _reproduce(source, benchmark)
    return templates.TemplateResponse(request, "table2.html", {"table": table})
