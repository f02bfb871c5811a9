"""Timing Pydantic schemas — component times, pipeline reports, benchmark geometry."""

import enum
from typing import Dict, List, Optional

from pydantic import BaseModel, Field

MPIXEL = 1 << 20


class PipelineMode(str, enum.Enum):
    UNMASKED = "unmasked"
    MASKED = "masked"


class Provenance(str, enum.Enum):
    PAPER = "paper"
    DERIVED = "derived"
    MEASURED_HOST = "measured-host"
    OVERRIDE = "override"


class Stage(str, enum.Enum):
    CIF = "cif"
    CIF_BUFFER = "cif_buffer"
    VPU = "vpu"
    LCD_BUFFER = "lcd_buffer"
    LCD = "lcd"


class ComponentTimes(BaseModel):
    """Per-stage durations in seconds."""

    cif_time: float = Field(0.0, ge=0)
    vpu_time: float = Field(0.0, ge=0)
    lcd_time: float = Field(0.0, ge=0)
    cif_buffer_time: float = Field(0.0, ge=0)
    lcd_buffer_time: float = Field(0.0, ge=0)
    provenance: Dict[str, Provenance] = Field(default_factory=dict)

    model_config = {"frozen": True}

    @classmethod
    def from_ms(cls, cif: float, vpu: float, lcd: float, cif_buffer: float = 0.0, lcd_buffer: float = 0.0,
                provenance: Optional[Dict[str, Provenance]] = None) -> "ComponentTimes":
        return cls(
            cif_time=cif / 1e3,
            vpu_time=vpu / 1e3,
            lcd_time=lcd / 1e3,
            cif_buffer_time=cif_buffer / 1e3,
            lcd_buffer_time=lcd_buffer / 1e3,
            provenance=provenance or {},
        )

    def as_ms(self) -> Dict[str, float]:
        return {
            "cif_ms": self.cif_time * 1e3,
            "vpu_ms": self.vpu_time * 1e3,
            "lcd_ms": self.lcd_time * 1e3,
            "cif_buffer_ms": self.cif_buffer_time * 1e3,
            "lcd_buffer_ms": self.lcd_buffer_time * 1e3,
        }


class BufferRate(BaseModel):
    """DRAM staging cost per megapixel (2^20 pixels)."""

    seconds_per_mpixel: float = Field(0.042, gt=0)

    @classmethod
    def from_ms(cls, ms_per_mpixel: float) -> "BufferRate":
        return cls(seconds_per_mpixel=ms_per_mpixel / 1e3)


class TimelineEntry(BaseModel):
    frame_id: int
    stage: Stage
    start: float
    end: float


class PipelineReport(BaseModel):
    mode: PipelineMode
    latency: float
    throughput: float
    period: float
    timeline: List[TimelineEntry] = Field(default_factory=list)

    @property
    def latency_ms(self) -> float:
        return self.latency * 1e3


class BenchmarkSpec(BaseModel):
    """Geometry of one benchmark as seen by the I/O path.

    Pixel counts are what crosses the bus (an RGB input counts three planes).
    """

    name: str
    input_pixels: int = Field(..., ge=0)
    output_pixels: int = Field(..., ge=0)
    input_bpp: int = 8
    output_bpp: int = 8
    vpu_ms: Optional[float] = Field(None, ge=0)
    vpu_provenance: Provenance = Provenance.PAPER
    cif_buffer_ms: Optional[float] = Field(None, ge=0)
    lcd_buffer_ms: Optional[float] = Field(None, ge=0)
