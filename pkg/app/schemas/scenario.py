"""Scenario and run-report Pydantic schemas."""

import enum
from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, Field, model_validator

from app.config import settings
from app.schemas.geometry import Pose6D
from app.schemas.timing import PipelineMode, PipelineReport, Provenance


class Benchmark(str, enum.Enum):
    BINNING = "binning"
    CONVOLUTION = "conv"
    RENDER = "render"
    CNN = "cnn"


class FrameGeometry(BaseModel):
    """Geometry of the scenario's primary frame.

    For binning and convolution this is the input image, for rendering the
    output depth image, for the CNN the RGB input (bpp per channel).
    """

    width: int = Field(..., ge=1)
    height: int = Field(..., ge=1)
    bpp: Literal[8, 16, 24] = 8


class ScenarioInputs(BaseModel):
    """File inputs, relative to the fixture root unless absolute. Missing images are synthesised from the seed."""

    image: Optional[str] = None
    mesh: Optional[str] = None
    weights: Optional[str] = None
    golden: Optional[str] = None


class BitFlip(BaseModel):
    link: Literal["cif", "lcd"] = "cif"
    cycle: int = Field(..., ge=0)
    bit: int = Field(..., ge=0)


class TimingConfig(BaseModel):
    """Where the component times come from."""

    source: Literal["paper", "derived", "measured-host"] = "paper"
    vpu_ms: Optional[float] = Field(None, ge=0)
    vpu_provenance: Provenance = Provenance.PAPER
    cif_buffer_ms: Optional[float] = Field(None, ge=0)
    lcd_buffer_ms: Optional[float] = Field(None, ge=0)
    buffer_ms_per_mpixel: float = Field(settings.BUFFER_MS_PER_MPIXEL, gt=0)
    n_frames: int = Field(settings.STREAM_FRAMES, ge=1)

    @model_validator(mode="after")
    def _derived_needs_vpu(self) -> "TimingConfig":
        if self.source == "derived" and self.vpu_ms is None:
            raise ValueError("derived timing needs vpu_ms")
        return self


class Scenario(BaseModel):
    name: str
    benchmark: Benchmark
    frame: FrameGeometry
    frequency: float = Field(settings.BUS_FREQUENCY_HZ, gt=0)
    lcd_frequency: Optional[float] = Field(None, gt=0)
    mode: PipelineMode = PipelineMode.MASKED
    inputs: ScenarioInputs = Field(default_factory=ScenarioInputs)
    synthetic: Literal["random", "constant", "gradient"] = "random"
    constant_value: int = Field(128, ge=0)
    seed: int = settings.SEED

    kernel_size: int = 3
    kernel: Optional[List[List[float]]] = None
    pose: Pose6D = Field(default_factory=Pose6D)
    focal: Optional[float] = Field(None, gt=0)
    near: float = Field(settings.RENDER_NEAR, gt=0)
    far: float = Field(settings.RENDER_FAR, gt=0)
    precision: Literal["fp16", "fp32"] = "fp16"

    n_bands: Optional[int] = Field(None, ge=1)
    n_workers: int = Field(settings.N_WORKERS, ge=1)

    inject: List[BitFlip] = Field(default_factory=list)
    golden_tolerance: float = Field(0.0, ge=0)
    timing: TimingConfig = Field(default_factory=TimingConfig)

    @model_validator(mode="after")
    def _check_render_range(self) -> "Scenario":
        if self.far <= self.near:
            raise ValueError("far must exceed near")
        return self

    @property
    def timing_key(self) -> str:
        """Row name in the bundled timing dataset."""
        if self.benchmark is Benchmark.CONVOLUTION:
            return f"conv{self.kernel_size}"
        return self.benchmark.value


class GoldenReport(BaseModel):
    max_abs_diff: float
    mean_abs_diff: float
    mismatched_pixels: int
    fraction_within: float
    tolerance: float
    passed: bool


class FunctionalResult(BaseModel):
    crc_ok_cif: bool
    crc_ok_lcd: bool
    output_width: int
    output_height: int
    output_bpp: int
    output_checksum: str
    golden: Optional[GoldenReport] = None

    @property
    def passed(self) -> bool:
        golden_ok = self.golden is None or self.golden.passed
        return self.crc_ok_cif and self.crc_ok_lcd and golden_ok


class RunReport(BaseModel):
    scenario: str
    benchmark: str
    mode: PipelineMode
    functional: FunctionalResult
    performance: PipelineReport
    analytical_latency_ms: float
    analytical_fps: float
    component_times_ms: Dict[str, float]
    provenance: Dict[str, Provenance]
    files: Dict[str, str] = Field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.functional.passed
