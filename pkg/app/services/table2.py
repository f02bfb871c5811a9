"""
Table II reproduction.

Each bundled benchmark is run through both timing modes and every cell is
compared with the printed value. Printed numbers are rounded, so a latency
cell passes within ±2 ms or ±2 % (whichever is larger) and a throughput cell
within ±0.1 FPS.
"""

import json
import logging
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Union

from pydantic import ValidationError

from app.errors import ConfigurationError
from app.schemas.bus import BusConfig
from app.schemas.table2 import DatasetBenchmark, Table2, Table2Cell, Table2Dataset, Table2Row, TimingSource
from app.schemas.timing import BenchmarkSpec, BufferRate, ComponentTimes, Provenance
from app.services import pipeline_model

logger = logging.getLogger(__name__)

BUNDLED_DATASET = Path(__file__).resolve().parent.parent / "data" / "table2_paper.json"
LATENCY_TOLERANCE_MS = 2.0
LATENCY_TOLERANCE_REL = 0.02
FPS_TOLERANCE = 0.1


def load_dataset(path: Optional[Union[str, Path]] = None) -> Table2Dataset:
    path = Path(path) if path else BUNDLED_DATASET
    if not path.is_file():
        raise ConfigurationError(f"Timing dataset not found: {path}")
    try:
        dataset = Table2Dataset.model_validate(json.loads(path.read_text(encoding="utf-8")))
    except (json.JSONDecodeError, ValidationError) as e:
        raise ConfigurationError(f"Timing dataset {path} is invalid: {e}") from e
    if not dataset.benchmarks:
        raise ConfigurationError(f"Timing dataset {path} has no benchmarks")
    return dataset


def paper_times(row: DatasetBenchmark) -> ComponentTimes:
    t = row.times_ms
    return ComponentTimes.from_ms(
        cif=t["cif"],
        vpu=t["vpu"],
        lcd=t["lcd"],
        cif_buffer=t.get("cif_buffer", 0.0),
        lcd_buffer=t.get("lcd_buffer", 0.0),
        provenance={name: Provenance.PAPER for name in ComponentTimes.model_fields if name.endswith("_time")},
    )


def benchmark_spec(row: DatasetBenchmark, vpu_ms: Optional[float] = None,
                   vpu_provenance: Provenance = Provenance.PAPER) -> BenchmarkSpec:
    return BenchmarkSpec(
        name=row.name,
        input_pixels=row.input_pixels,
        output_pixels=row.output_pixels,
        input_bpp=row.input_bpp,
        output_bpp=row.output_bpp,
        vpu_ms=row.times_ms["vpu"] if vpu_ms is None else vpu_ms,
        vpu_provenance=vpu_provenance,
        cif_buffer_ms=row.buffer_overrides_ms.get("cif_buffer"),
        lcd_buffer_ms=row.buffer_overrides_ms.get("lcd_buffer"),
    )


def component_times(row: DatasetBenchmark, source: TimingSource, dataset: Table2Dataset) -> ComponentTimes:
    if source == "paper":
        return paper_times(row)
    if source == "derived":
        bus = BusConfig(frequency=dataset.frequency_hz, bpp=row.input_bpp, width=1, height=1)
        return pipeline_model.derive_component_times(
            benchmark_spec(row), bus, BufferRate.from_ms(dataset.buffer_ms_per_mpixel)
        )
    raise ConfigurationError(f"Unknown timing source '{source}'")


def _latency_cell(model_ms: float, paper_ms: float) -> Table2Cell:
    delta = abs(model_ms - paper_ms)
    limit = max(LATENCY_TOLERANCE_MS, LATENCY_TOLERANCE_REL * paper_ms)
    return Table2Cell(model=model_ms, paper=paper_ms, delta=delta, within_tolerance=delta <= limit + 1e-9)


def _fps_cell(model_fps: float, paper_fps: float) -> Table2Cell:
    delta = abs(model_fps - paper_fps)
    return Table2Cell(model=model_fps, paper=paper_fps, delta=delta, within_tolerance=delta <= FPS_TOLERANCE + 1e-9)


def reproduce_row(row: DatasetBenchmark, source: TimingSource, dataset: Table2Dataset) -> Table2Row:
    t = component_times(row, source, dataset)
    u_lat, u_fps = pipeline_model.unmasked_metrics(t)
    m_lat, m_fps = pipeline_model.masked_metrics(t)
    p = row.printed
    return Table2Row(
        benchmark=row.name,
        title=row.title,
        io_data=row.io_data,
        times_ms=t.as_ms(),
        provenance=t.provenance,
        unmasked_latency_ms=_latency_cell(u_lat * 1e3, p["unmasked_latency_ms"]),
        unmasked_fps=_fps_cell(u_fps, p["unmasked_fps"]),
        masked_latency_ms=_latency_cell(m_lat * 1e3, p["masked_latency_ms"]),
        masked_fps=_fps_cell(m_fps, p["masked_fps"]),
        masking_gain=m_fps / u_fps,
    )


def reproduce_table2(
    source: TimingSource = "paper",
    benchmarks: Optional[Iterable[str]] = None,
    dataset_path: Optional[Union[str, Path]] = None,
) -> Table2:
    """All bundled benchmarks (or the selected ones) in both modes, with deltas to the printed table."""
    dataset = load_dataset(dataset_path)
    rows: Dict[str, DatasetBenchmark] = {row.name: row for row in dataset.benchmarks}
    selected: List[str] = list(benchmarks) if benchmarks else list(rows)
    unknown = [name for name in selected if name not in rows]
    if unknown:
        raise ConfigurationError(f"Unknown benchmark(s): {', '.join(unknown)}; known: {', '.join(rows)}")

    table = Table2(
        source=source,
        frequency_hz=dataset.frequency_hz,
        rows=[reproduce_row(rows[name], source, dataset) for name in selected],
    )
    for row in table.rows:
        for name, cell in row.cells.items():
            if not cell.within_tolerance:
                logger.warning(f"{row.benchmark} {name}: model {cell.model:.2f} vs paper {cell.paper} outside tolerance")
    logger.info(f"Reproduced {len(table.rows)} Table II row(s) from {source} times")
    return table


def format_table2(table: Table2) -> str:
    """Fixed-width text rendering for the terminal."""
    header = (
        f"{'Benchmark':<22}{'CIF':>8}{'VPU':>8}{'LCD':>8}"
        f"{'U-Lat':>10}{'U-FPS':>8}{'M-Lat':>10}{'M-FPS':>8}{'Gain':>7}"
    )
    lines = [f"Table II ({table.source} times, {table.frequency_hz / 1e6:g} MHz)", header, "-" * len(header)]
    for row in table.rows:
        t = row.times_ms
        lines.append(
            f"{row.title:<22}{t['cif_ms']:>8.1f}{t['vpu_ms']:>8.1f}{t['lcd_ms']:>8.1f}"
            f"{row.unmasked_latency_ms.model:>10.1f}{row.unmasked_fps.model:>8.2f}"
            f"{row.masked_latency_ms.model:>10.1f}{row.masked_fps.model:>8.2f}{row.masking_gain:>7.2f}"
        )
        lines.append(
            f"{'  paper / |delta|':<46}"
            f"{row.unmasked_latency_ms.paper:>6g}/{row.unmasked_latency_ms.delta:<3.1f}"
            f"{row.unmasked_fps.paper:>4g}/{row.unmasked_fps.delta:<3.2f}"
            f"{row.masked_latency_ms.paper:>6g}/{row.masked_latency_ms.delta:<3.1f}"
            f"{row.masked_fps.paper:>4g}/{row.masked_fps.delta:<3.2f}"
        )
    lines.append("all cells within tolerance" if table.all_within_tolerance else "some cells outside tolerance")
    return "\n".join(lines)
