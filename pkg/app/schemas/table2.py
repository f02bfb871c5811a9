"""Table II reproduction schemas."""

from typing import Dict, List, Literal

from pydantic import BaseModel, Field

from app.schemas.timing import Provenance

TimingSource = Literal["paper", "derived"]


class DatasetBenchmark(BaseModel):
    """One bundled benchmark row: geometry, printed component times and printed results."""

    name: str
    title: str
    io_data: str
    input_pixels: int = Field(..., ge=0)
    output_pixels: int = Field(..., ge=0)
    input_bpp: int = 8
    output_bpp: int = 8
    times_ms: Dict[str, float]
    buffer_overrides_ms: Dict[str, float] = Field(default_factory=dict)
    printed: Dict[str, float]


class Table2Dataset(BaseModel):
    frequency_hz: float = Field(50e6, gt=0)
    buffer_ms_per_mpixel: float = Field(42.0, gt=0)
    benchmarks: List[DatasetBenchmark] = Field(default_factory=list)


class Table2Cell(BaseModel):
    model: float
    paper: float
    delta: float
    within_tolerance: bool


class Table2Row(BaseModel):
    benchmark: str
    title: str
    io_data: str
    times_ms: Dict[str, float]
    provenance: Dict[str, Provenance] = Field(default_factory=dict)
    unmasked_latency_ms: Table2Cell
    unmasked_fps: Table2Cell
    masked_latency_ms: Table2Cell
    masked_fps: Table2Cell
    masking_gain: float

    @property
    def cells(self) -> Dict[str, Table2Cell]:
        return {
            "unmasked_latency_ms": self.unmasked_latency_ms,
            "unmasked_fps": self.unmasked_fps,
            "masked_latency_ms": self.masked_latency_ms,
            "masked_fps": self.masked_fps,
        }


class Table2(BaseModel):
    source: TimingSource
    frequency_hz: float
    rows: List[Table2Row]

    @property
    def all_within_tolerance(self) -> bool:
        return all(cell.within_tolerance for row in self.rows for cell in row.cells.values())
