"""
Pipeline timing engine — Unmasked / Masked I/O latency and throughput.

Unmasked:  latency = CIF + VPU + LCD, throughput = 1 / latency.

Masked: two processes run in lock-step iterations. The I/O process runs
LCD-buffer(out n-1), CIF(in n+1), CIF-buffer(in n+1), LCD(out n-1) while
the compute process runs VPU(n). With chain = LCDbuf + CIF + CIFbuf + LCD
and period = max(VPU, chain):

    latency    = max(VPU - LCDbuf, CIF + CIFbuf + LCD) + period + chain
    throughput = 1 / period

`simulate_stream` runs that schedule as a discrete-event timeline at 1 µs
resolution and reproduces both numbers.
"""

from __future__ import annotations

import logging
from typing import Dict, List, Tuple, Union

from app.errors import ConfigurationError, ThroughputUndefinedError
from app.schemas.bus import BusConfig
from app.schemas.timing import (
    MPIXEL,
    BenchmarkSpec,
    BufferRate,
    ComponentTimes,
    PipelineMode,
    PipelineReport,
    Provenance,
    Stage,
    TimelineEntry,
)
from app.services.frame_codec import Frame
from app.services.pixel_bus import io_frame_rate, transfer_time

logger = logging.getLogger(__name__)

DEFAULT_TICK = 1e-6


# ── Analytical model ──

def io_chain(t: ComponentTimes) -> float:
    return t.lcd_buffer_time + t.cif_time + t.cif_buffer_time + t.lcd_time


def unmasked_metrics(t: ComponentTimes) -> Tuple[float, float]:
    """(latency s, throughput frames/s) for serial receive → compute → transmit."""
    latency = t.cif_time + t.vpu_time + t.lcd_time
    if latency <= 0:
        raise ThroughputUndefinedError("All component times are zero")
    return latency, 1.0 / latency


def masked_metrics(t: ComponentTimes) -> Tuple[float, float]:
    """(latency s, throughput frames/s) for the triple-buffered streaming pipeline."""
    chain = io_chain(t)
    period = max(t.vpu_time, chain)
    if period <= 0:
        raise ThroughputUndefinedError("All component times are zero")
    head = max(max(t.vpu_time - t.lcd_buffer_time, 0.0), t.cif_time + t.cif_buffer_time + t.lcd_time)
    return head + period + chain, 1.0 / period


def metrics(t: ComponentTimes, mode: PipelineMode) -> Tuple[float, float]:
    if PipelineMode(mode) is PipelineMode.MASKED:
        return masked_metrics(t)
    return unmasked_metrics(t)


def masking_gain(t: ComponentTimes) -> float:
    """Masked throughput over unmasked throughput (> 1 means masking pays off)."""
    return masked_metrics(t)[1] / unmasked_metrics(t)[1]


def buffer_time(frame: Union[Frame, int], rate: BufferRate) -> float:
    """DRAM staging copy cost; scales with pixel count, not bytes."""
    pixels = frame.pixel_count if isinstance(frame, Frame) else int(frame)
    return pixels / MPIXEL * rate.seconds_per_mpixel


def io_throughput(pixel_count: int, frequency: float) -> float:
    """Frames/s of the bus alone, no buffering or compute."""
    if pixel_count <= 0:
        raise ThroughputUndefinedError("No pixels to transfer")
    return io_frame_rate(pixel_count, frequency)


def derive_component_times(benchmark: BenchmarkSpec, bus: BusConfig, rate: BufferRate) -> ComponentTimes:
    """Bus-derived I/O times, rate-derived buffer times, externally supplied VPU time."""
    if benchmark.vpu_ms is None:
        raise ConfigurationError(f"Benchmark '{benchmark.name}' has no vpu_time")
    provenance: Dict[str, Provenance] = {
        "cif_time": Provenance.DERIVED,
        "lcd_time": Provenance.DERIVED,
        "vpu_time": benchmark.vpu_provenance,
        "cif_buffer_time": Provenance.DERIVED,
        "lcd_buffer_time": Provenance.DERIVED,
    }
    cif_buffer = buffer_time(benchmark.input_pixels, rate)
    if benchmark.cif_buffer_ms is not None:
        cif_buffer = benchmark.cif_buffer_ms / 1e3
        provenance["cif_buffer_time"] = Provenance.OVERRIDE
    lcd_buffer = buffer_time(benchmark.output_pixels, rate)
    if benchmark.lcd_buffer_ms is not None:
        lcd_buffer = benchmark.lcd_buffer_ms / 1e3
        provenance["lcd_buffer_time"] = Provenance.OVERRIDE
    return ComponentTimes(
        cif_time=transfer_time(benchmark.input_pixels, bus.frequency),
        vpu_time=benchmark.vpu_ms / 1e3,
        lcd_time=transfer_time(benchmark.output_pixels, bus.frequency),
        cif_buffer_time=cif_buffer,
        lcd_buffer_time=lcd_buffer,
        provenance=provenance,
    )


# ── Discrete-event simulation ──

class _Timeline:
    """Collects stage intervals; every boundary is snapped to the tick grid exactly once."""

    def __init__(self, tick: float, n_frames: int):
        self.tick = tick
        self.n_frames = n_frames
        self.entries: List[TimelineEntry] = []

    def ticks(self, seconds: float) -> int:
        return int(round(seconds / self.tick))

    def add(self, frame_id: int, stage: Stage, start: float, duration: float) -> float:
        """Record one stage and return its end, the next stage's start."""
        end = start + duration
        if frame_id < self.n_frames:
            self.entries.append(
                TimelineEntry(
                    frame_id=frame_id,
                    stage=stage,
                    start=self.ticks(start) * self.tick,
                    end=self.ticks(end) * self.tick,
                )
            )
        return end


def simulate_stream(
    t: ComponentTimes,
    mode: PipelineMode,
    n_frames: int,
    tick: float = DEFAULT_TICK,
) -> PipelineReport:
    """Event timeline for `n_frames` frames; period and latency are read off the last frames.

    Event times accumulate in seconds and are quantized once each, so the reported
    period and latency stay within one tick of the exact schedule.
    """
    if n_frames < 1:
        raise ConfigurationError(f"Need at least one frame, got {n_frames}")
    mode = PipelineMode(mode)
    if mode is PipelineMode.MASKED and n_frames < 3:
        logger.warning(f"{n_frames} frames do not reach the masked steady state")

    cif, vpu, lcd = t.cif_time, t.vpu_time, t.lcd_time
    cif_buf, lcd_buf = t.cif_buffer_time, t.lcd_buffer_time
    timeline = _Timeline(tick, n_frames)
    starts: List[float] = [0.0] * n_frames
    done: List[float] = [0.0] * n_frames

    if mode is PipelineMode.UNMASKED:
        now = 0.0
        for k in range(n_frames):
            starts[k] = now
            now = timeline.add(k, Stage.CIF, now, cif)
            now = timeline.add(k, Stage.VPU, now, vpu)
            now = timeline.add(k, Stage.LCD, now, lcd)
            done[k] = now
    else:
        # iteration s: I/O receives frame s and returns frame s-2, compute runs frame s-1;
        # input keeps streaming past the last reported frame
        begin = 0.0
        for s in range(n_frames + 2):
            io = begin
            out = s - 2
            if out >= 0:
                io = timeline.add(out, Stage.LCD_BUFFER, io, lcd_buf)
            if s < n_frames:
                starts[s] = io
            io = timeline.add(s, Stage.CIF, io, cif)
            io = timeline.add(s, Stage.CIF_BUFFER, io, cif_buf)
            if out >= 0:
                io = timeline.add(out, Stage.LCD, io, lcd)
                if out < n_frames:
                    done[out] = io
            compute_end = begin
            if s >= 1:
                compute_end = timeline.add(s - 1, Stage.VPU, begin, vpu)
            begin = max(io, compute_end)

    done_ticks = [timeline.ticks(x) for x in done]
    start_tick = timeline.ticks(starts[-1])
    period = done_ticks[-1] - done_ticks[-2] if n_frames >= 2 else done_ticks[-1] - start_tick
    latency = done_ticks[-1] - start_tick
    if period <= 0:
        raise ThroughputUndefinedError("Simulated period is zero")
    report = PipelineReport(
        mode=mode,
        latency=latency * tick,
        throughput=1.0 / (period * tick),
        period=period * tick,
        timeline=sorted(timeline.entries, key=lambda e: (e.start, e.frame_id)),
    )
    logger.debug(f"{mode.value}: period {report.period * 1e3:.3f} ms, latency {report.latency * 1e3:.3f} ms")
    return report
