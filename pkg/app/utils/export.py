"""CSV and JSON artefacts of a run: reports, bus events, register dumps."""

import csv
import json
from pathlib import Path
from typing import Any, Union

from app.schemas.scenario import RunReport
from app.schemas.table2 import Table2
from app.services.pixel_bus import BusEventStream, EventKind

PathLike = Union[str, Path]

REPORT_COLUMNS = (
    "scenario", "benchmark", "mode",
    "cif_ms", "vpu_ms", "lcd_ms", "cif_buffer_ms", "lcd_buffer_ms",
    "latency_ms", "throughput_fps", "analytical_latency_ms", "analytical_fps",
    "crc_ok_cif", "crc_ok_lcd", "golden_match", "output_checksum",
)


def write_json(path: PathLike, payload: Any) -> Path:
    path = Path(path)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def write_events_csv(path: PathLike, stream: BusEventStream) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["cycle", "kind", "value"])
        for event in stream:
            writer.writerow([event.cycle, EventKind(event.kind).name, event.value])
    return path


def report_row(report: RunReport) -> dict:
    golden = report.functional.golden
    row = {
        "scenario": report.scenario,
        "benchmark": report.benchmark,
        "mode": report.mode.value,
        "latency_ms": f"{report.performance.latency * 1e3:.3f}",
        "throughput_fps": f"{report.performance.throughput:.4f}",
        "analytical_latency_ms": f"{report.analytical_latency_ms:.3f}",
        "analytical_fps": f"{report.analytical_fps:.4f}",
        "crc_ok_cif": report.functional.crc_ok_cif,
        "crc_ok_lcd": report.functional.crc_ok_lcd,
        "golden_match": "" if golden is None else golden.passed,
        "output_checksum": report.functional.output_checksum,
    }
    row.update({k: f"{v:.3f}" for k, v in report.component_times_ms.items()})
    return row


def write_report_csv(path: PathLike, report: RunReport) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=REPORT_COLUMNS)
        writer.writeheader()
        writer.writerow(report_row(report))
    return path


def write_table2_csv(path: PathLike, table: Table2) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow([
            "benchmark", "cif_ms", "vpu_ms", "lcd_ms", "cif_buffer_ms", "lcd_buffer_ms",
            "cell", "model", "paper", "delta", "within_tolerance",
        ])
        for row in table.rows:
            t = row.times_ms
            for name, cell in row.cells.items():
                writer.writerow([
                    row.benchmark, t["cif_ms"], t["vpu_ms"], t["lcd_ms"], t["cif_buffer_ms"], t["lcd_buffer_ms"],
                    name, f"{cell.model:.4f}", cell.paper, f"{cell.delta:.4f}", cell.within_tolerance,
                ])
    return path
