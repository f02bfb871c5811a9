"""
End-to-end scenario runner.

Host frame → CIF link → VPU kernel → LCD link → Host, with optional bit-flip
injection on either link, a golden-image check on what comes back, and the
pipeline timing model for the chosen mode. Reports and artefacts are written
with no timestamps, so the same scenario and seed give byte-identical files.
"""

import json
import logging
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Union

import numpy as np
from pydantic import ValidationError

from app.config import settings
from app.errors import ConfigurationError, GeometryError, ParameterError
from app.schemas.bus import BusConfig
from app.schemas.geometry import CameraIntrinsics, Pose6D
from app.schemas.scenario import (
    Benchmark,
    BitFlip,
    FrameGeometry,
    FunctionalResult,
    RunReport,
    Scenario,
)
from app.schemas.timing import BenchmarkSpec, BufferRate, ComponentTimes, Provenance
from app.services import pipeline_model, table2
from app.services.frame_codec import Frame, trailer_lines
from app.services.golden import compare_golden, frame_checksum
from app.services.kernels import binning, cnn, convolution, rendering
from app.services.kernels.partition import PartitionMode
from app.services.pixel_bus import BusEventStream, PixelLink, RegisterFile, inject_errors, transfer_time
from app.utils import export
from app.utils.imageio import read_pgm, read_ppm, write_pgm
from app.utils.mesh_io import cube_mesh, read_off
from app.utils.weights_io import read_weights

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

FULL_SIZE = {
    Benchmark.BINNING: FrameGeometry(width=2048, height=2048, bpp=8),
    Benchmark.CONVOLUTION: FrameGeometry(width=1024, height=1024, bpp=8),
    Benchmark.RENDER: FrameGeometry(width=1024, height=1024, bpp=16),
    Benchmark.CNN: FrameGeometry(width=1024, height=1024, bpp=16),
}


@dataclass
class _Job:
    """Frames sent over CIF, the VPU-side kernel, and its sequential reference."""

    inputs: List[Frame]
    process: Callable[[List[Frame]], Frame]
    reference: Callable[[List[Frame]], Frame]


# ── Scenario files ──

def load_scenario(path: PathLike) -> Scenario:
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"Scenario file not found: {path}")
    try:
        return Scenario.model_validate(json.loads(path.read_text(encoding="utf-8")))
    except (json.JSONDecodeError, ValidationError) as e:
        raise ConfigurationError(f"Scenario {path} is invalid: {e}") from e


def full_size(scenario: Scenario) -> Scenario:
    """Same scenario at the benchmark's production geometry, with synthesised inputs."""
    inputs = scenario.inputs.model_copy(update={"image": None, "golden": None})
    return scenario.model_copy(update={"frame": FULL_SIZE[scenario.benchmark], "inputs": inputs})


def _resolve(path: str, fixture_root: Path) -> Path:
    p = Path(path)
    resolved = p if p.is_absolute() else fixture_root / p
    if not resolved.is_file():
        raise ConfigurationError(f"Input file not found: {resolved}")
    return resolved


# ── Inputs ──

def _synthesise(scenario: Scenario, shape: Sequence[int], bpp: int) -> np.ndarray:
    top = (1 << bpp) - 1
    if scenario.synthetic == "constant":
        return np.full(shape, min(scenario.constant_value, top), dtype=np.uint32)
    if scenario.synthetic == "gradient":
        h, w = shape[0], shape[1]
        ramp = np.add.outer(np.arange(h), np.arange(w)) * top // max(h + w - 2, 1)
        if len(shape) == 3:
            ramp = np.repeat(ramp[:, :, None], shape[2], axis=2)
        return ramp.astype(np.uint32)
    rng = np.random.default_rng(scenario.seed)
    return rng.integers(0, top + 1, size=tuple(shape), dtype=np.uint32)


def _image_frame(scenario: Scenario, fixture_root: Path) -> Frame:
    geo = scenario.frame
    if scenario.inputs.image:
        frame = read_pgm(_resolve(scenario.inputs.image, fixture_root))
        if (frame.width, frame.height, frame.bpp) != (geo.width, geo.height, geo.bpp):
            raise GeometryError(
                f"Image {frame.width}x{frame.height}@{frame.bpp}bpp does not match "
                f"scenario frame {geo.width}x{geo.height}@{geo.bpp}bpp"
            )
        return frame
    return Frame.from_array(_synthesise(scenario, (geo.height, geo.width), geo.bpp), geo.bpp)


def encode_pose(pose: Pose6D) -> Frame:
    """6×1 frame at 16 bpp carrying the pose as IEEE half-precision bit patterns."""
    halves = np.asarray(pose.as_vector(), dtype=np.float16)
    if not np.all(np.isfinite(halves)):
        raise ConfigurationError(f"Pose {pose.as_vector()} does not fit in float16")
    return Frame.from_array(halves.view(np.uint16).reshape(1, 6), 16)


def decode_pose(frame: Frame) -> Pose6D:
    if (frame.width, frame.height, frame.bpp) != (6, 1, 16):
        raise GeometryError(f"Pose frame must be 6x1 at 16 bpp, got {frame.width}x{frame.height}@{frame.bpp}")
    halves = frame.pixels.ravel().astype(np.uint16).view(np.float16)
    return Pose6D.from_vector(halves.astype(np.float64))


def _band_kwargs(scenario: Scenario, default_bands: int) -> dict:
    return {"n_bands": scenario.n_bands or default_bands, "n_workers": scenario.n_workers}


def _prepare(scenario: Scenario, fixture_root: Path) -> _Job:
    geo = scenario.frame

    if scenario.benchmark is Benchmark.BINNING:
        bands = _band_kwargs(scenario, settings.BINNING_BANDS)
        return _Job(
            inputs=[_image_frame(scenario, fixture_root)],
            process=lambda frames: binning.average_binning(frames[0], mode=PartitionMode.STATIC, **bands),
            reference=lambda frames: Frame.from_array(binning.bin_reference(frames[0].pixels), 8),
        )

    if scenario.benchmark is Benchmark.CONVOLUTION:
        if scenario.kernel is not None:
            kernel = convolution.check_kernel(scenario.kernel)
            if kernel.shape[0] != scenario.kernel_size:
                raise ParameterError(f"Kernel is {kernel.shape[0]}x{kernel.shape[0]}, kernel_size says {scenario.kernel_size}")
        else:
            kernel = convolution.box_kernel(scenario.kernel_size)
        bands = _band_kwargs(scenario, settings.BINNING_BANDS)
        return _Job(
            inputs=[_image_frame(scenario, fixture_root)],
            process=lambda frames: convolution.fp_convolution(frames[0], kernel, mode=PartitionMode.STATIC, **bands),
            reference=lambda frames: convolution.fp_convolution(frames[0], kernel, n_bands=1, n_workers=1),
        )

    if scenario.benchmark is Benchmark.RENDER:
        if geo.bpp != 16:
            raise GeometryError(f"Depth images are 16 bpp, scenario frame says {geo.bpp}")
        mesh = read_off(_resolve(scenario.inputs.mesh, fixture_root)) if scenario.inputs.mesh else cube_mesh()
        camera = CameraIntrinsics.centered(geo.width, geo.height, scenario.focal or float(geo.width))
        near, far = scenario.near, scenario.far
        bands = _band_kwargs(scenario, settings.RENDER_BANDS)

        def render(frames: List[Frame]) -> Frame:
            return rendering.render_depth(mesh, decode_pose(frames[0]), camera, near, far,
                                          mode=PartitionMode.DYNAMIC, **bands)

        def render_reference(frames: List[Frame]) -> Frame:
            return rendering.render_depth(mesh, decode_pose(frames[0]), camera, near, far,
                                          n_bands=1, n_workers=1, mode=PartitionMode.STATIC)

        return _Job(inputs=[encode_pose(scenario.pose)], process=render, reference=render_reference)

    if scenario.benchmark is Benchmark.CNN:
        if geo.bpp != 16:
            raise GeometryError(f"CNN input is 16 bpp per channel, scenario frame says {geo.bpp}")
        if scenario.inputs.image:
            rgb, bpp = read_ppm(_resolve(scenario.inputs.image, fixture_root))
            if (rgb.shape[1], rgb.shape[0], bpp) != (geo.width, geo.height, geo.bpp):
                raise GeometryError(f"Image {rgb.shape[1]}x{rgb.shape[0]}@{bpp}bpp does not match scenario frame")
        else:
            rgb = _synthesise(scenario, (geo.height, geo.width, 3), 16)
        model = read_weights(_resolve(scenario.inputs.weights, fixture_root)) if scenario.inputs.weights \
            else cnn.CnnModel.from_seed(scenario.seed)
        precision = scenario.precision

        def detect(frames: List[Frame]) -> Frame:
            image = np.stack([f.pixels for f in frames], axis=2)
            scores = cnn.cnn_ship_detect(image, model, precision)
            return Frame.from_array(cnn.scores_to_pixels(scores).reshape(1, -1), 16)

        planes = [Frame.from_array(rgb[:, :, c], 16) for c in range(3)]
        return _Job(inputs=planes, process=detect, reference=detect)

    raise ConfigurationError(f"Unknown benchmark {scenario.benchmark}")


# ── Bus legs ──

def _flips_for(flips: Sequence[BitFlip], link: str, start: int, end: int) -> List[tuple]:
    return [(f.cycle - start, f.bit) for f in flips if f.link == link and start <= f.cycle < end]


def _send(link: PixelLink, frames: List[Frame], flips: Sequence[BitFlip]) -> tuple:
    """Transmit frames back to back, flip requested bits, receive. Returns (frames, all_ok, streams)."""
    received, streams, all_ok = [], [], True
    for slot in link.transmit_sequence(frames):
        stream = inject_errors(slot.stream, _flips_for(flips, link.name, slot.start_cycle, slot.end_cycle))
        frame, ok = link.receive(stream)
        received.append(frame)
        streams.append(stream)
        all_ok = all_ok and ok
    return received, all_ok, streams


# ── Timing ──

def _component_times(scenario: Scenario, job: _Job, output: Frame, vpu_measured_ms: float,
                     dataset_path: Optional[PathLike]) -> ComponentTimes:
    timing = scenario.timing
    if timing.source == "paper":
        dataset = table2.load_dataset(dataset_path)
        rows = {row.name: row for row in dataset.benchmarks}
        if scenario.timing_key not in rows:
            raise ConfigurationError(f"No paper timing for '{scenario.timing_key}'; known: {', '.join(rows)}")
        return table2.paper_times(rows[scenario.timing_key])

    measured = timing.source == "measured-host"
    first = job.inputs[0]
    spec = BenchmarkSpec(
        name=scenario.timing_key,
        input_pixels=sum(f.pixel_count for f in job.inputs),
        output_pixels=output.pixel_count,
        input_bpp=first.bpp,
        output_bpp=output.bpp,
        vpu_ms=vpu_measured_ms if measured else timing.vpu_ms,
        vpu_provenance=Provenance.MEASURED_HOST if measured else timing.vpu_provenance,
        cif_buffer_ms=timing.cif_buffer_ms,
        lcd_buffer_ms=timing.lcd_buffer_ms,
    )
    bus = BusConfig(
        frequency=scenario.frequency,
        bpp=first.bpp,
        width=first.width,
        height=first.height + trailer_lines(first.width, first.bpp),
    )
    t = pipeline_model.derive_component_times(spec, bus, BufferRate.from_ms(timing.buffer_ms_per_mpixel))
    if scenario.lcd_frequency:
        t = t.model_copy(update={"lcd_time": transfer_time(output.pixel_count, scenario.lcd_frequency)})
    return t


# ── Entry point ──

def run_scenario(
    scenario: Scenario,
    output_dir: Optional[PathLike] = None,
    fixture_root: Optional[PathLike] = None,
    dump_bus_events: bool = False,
    dataset_path: Optional[PathLike] = None,
) -> RunReport:
    """Run one scenario functionally and through the timing model; write artefacts if `output_dir` is set."""
    fixture_root = Path(fixture_root or settings.FIXTURE_ROOT)
    job = _prepare(scenario, fixture_root)
    first = job.inputs[0]

    cif = PixelLink("cif", scenario.frequency, RegisterFile(first.width, first.height, first.bpp))
    received, cif_ok, cif_streams = _send(cif, job.inputs, scenario.inject)

    started = time.perf_counter()
    output = job.process(received)
    vpu_measured_ms = (time.perf_counter() - started) * 1e3

    lcd = PixelLink.for_frame("lcd", scenario.lcd_frequency or scenario.frequency, output)
    returned, lcd_ok, lcd_streams = _send(lcd, [output], scenario.inject)
    returned = returned[0]

    if scenario.inputs.golden:
        golden = read_pgm(_resolve(scenario.inputs.golden, fixture_root))
    else:
        golden = job.reference(job.inputs)
    functional = FunctionalResult(
        crc_ok_cif=cif_ok,
        crc_ok_lcd=lcd_ok,
        output_width=returned.width,
        output_height=returned.height,
        output_bpp=returned.bpp,
        output_checksum=frame_checksum(returned),
        golden=compare_golden(returned, golden, scenario.golden_tolerance),
    )

    t = _component_times(scenario, job, output, vpu_measured_ms, dataset_path)
    tick = settings.EVENT_TICK_US * 1e-6
    performance = pipeline_model.simulate_stream(t, scenario.mode, scenario.timing.n_frames, tick=tick)
    latency, throughput = pipeline_model.metrics(t, scenario.mode)

    report = RunReport(
        scenario=scenario.name,
        benchmark=scenario.timing_key,
        mode=scenario.mode,
        functional=functional,
        performance=performance,
        analytical_latency_ms=latency * 1e3,
        analytical_fps=throughput,
        component_times_ms=t.as_ms(),
        provenance=t.provenance,
    )
    if output_dir is not None:
        report = _write_artefacts(Path(output_dir), report, returned, cif, lcd, cif_streams, lcd_streams, dump_bus_events)

    status = "PASS" if report.passed else "FAIL"
    logger.info(
        f"{scenario.name}: {status}, {scenario.mode.value} latency {report.performance.latency * 1e3:.1f} ms, "
        f"{report.performance.throughput:.2f} FPS"
    )
    return report


def _write_artefacts(out: Path, report: RunReport, output: Frame, cif: PixelLink, lcd: PixelLink,
                     cif_streams: List[BusEventStream], lcd_streams: List[BusEventStream],
                     dump_bus_events: bool) -> RunReport:
    out.mkdir(parents=True, exist_ok=True)
    files: Dict[str, str] = {"output": "output.pgm", "report_json": "report.json", "report_csv": "report.csv"}
    write_pgm(out / files["output"], output)
    if dump_bus_events:
        for i, stream in enumerate(cif_streams):
            name = "events_cif.csv" if len(cif_streams) == 1 else f"events_cif_{i}.csv"
            export.write_events_csv(out / name, stream)
            files[name.removesuffix(".csv")] = name
        export.write_events_csv(out / "events_lcd.csv", lcd_streams[0])
        files["events_lcd"] = "events_lcd.csv"
        export.write_json(out / "registers.json", {"cif": cif.registers.dump(), "lcd": lcd.registers.dump()})
        files["registers"] = "registers.json"
    report = report.model_copy(update={"files": files})
    export.write_json(out / files["report_json"], report.model_dump(mode="json"))
    export.write_report_csv(out / files["report_csv"], report)
    return report
