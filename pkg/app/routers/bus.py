"""Bus router — transfer-rate law."""

from fastapi import APIRouter, Query

from app.config import settings
from app.services.pixel_bus import io_frame_rate, transfer_time

router = APIRouter(prefix="/bus", tags=["bus"])


@router.get("/transfer-time")
async def get_transfer_time(
    pixels: int = Query(..., ge=1),
    frequency: float = Query(settings.BUS_FREQUENCY_HZ, gt=0),
):
    seconds = transfer_time(pixels, frequency)
    return {
        "pixels": pixels,
        "frequency_hz": frequency,
        "transfer_ms": seconds * 1e3,
        "io_fps": io_frame_rate(pixels, frequency),
    }
