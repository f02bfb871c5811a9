"""
cifsim command line.

    python -m app.cli fixtures/scenarios/conv3.json --output-dir out/conv3 --strict
    python -m app.cli --reproduce-table2 [--benchmark conv3] [--source derived]

Exit codes: 0 pass, 1 functional failure (CRC or golden) under --strict,
2 configuration or input error.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from app.config import settings
from app.errors import (
    ConfigurationError,
    FileFormatError,
    GeometryError,
    HarnessError,
    ParameterError,
    PartitionError,
    SimulatorError,
    ThroughputUndefinedError,
)
from app.schemas.timing import PipelineMode
from app.services.scenario_runner import full_size, load_scenario, run_scenario
from app.services.table2 import format_table2, reproduce_table2
from app.utils.export import write_json, write_table2_csv

logger = logging.getLogger("app.cli")

EXIT_OK = 0
EXIT_FUNCTIONAL = 1
EXIT_CONFIG = 2

CONFIG_ERRORS = (
    ConfigurationError, FileFormatError, GeometryError, HarnessError, ParameterError, PartitionError,
    ThroughputUndefinedError,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cifsim",
        description="FPGA & VPU CIF/LCD co-processing simulator",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="Relative input paths in scenarios resolve against FIXTURE_ROOT.",
    )
    parser.add_argument("scenario", nargs="?", help="Scenario JSON file")
    parser.add_argument("--output-dir", default=None, help=f"Report directory (default: {settings.OUTPUT_DIR}/<scenario>)")
    parser.add_argument("--mode", choices=[m.value for m in PipelineMode], default=None,
                        help="Override the scenario's pipeline mode")
    parser.add_argument("--strict", action="store_true", help="Exit 1 on any CRC failure or golden mismatch")
    parser.add_argument("--full-size", action="store_true", help="Run at production geometry (1-4 MPixel)")
    parser.add_argument("--dump-bus-events", action="store_true", help="Write bus event CSVs and register dumps")
    parser.add_argument("--reproduce-table2", action="store_true", help="Print the Table II reproduction")
    parser.add_argument("--benchmark", action="append", default=None,
                        help="Restrict --reproduce-table2 to this benchmark (repeatable)")
    parser.add_argument("--source", choices=["paper", "derived"], default="paper",
                        help="Component times for --reproduce-table2")
    return parser


def _table2(args: argparse.Namespace) -> int:
    table = reproduce_table2(source=args.source, benchmarks=args.benchmark,
                             dataset_path=settings.TABLE2_DATASET or None)
    print(format_table2(table))
    if args.output_dir:
        out = Path(args.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_json(out / "table2.json", table.model_dump(mode="json"))
        write_table2_csv(out / "table2.csv", table)
    return EXIT_OK


def _scenario(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    if args.mode:
        scenario = scenario.model_copy(update={"mode": PipelineMode(args.mode)})
    if args.full_size:
        scenario = full_size(scenario)
    output_dir = args.output_dir or str(Path(settings.OUTPUT_DIR) / scenario.name)
    report = run_scenario(scenario, output_dir=output_dir, dump_bus_events=args.dump_bus_events)

    f = report.functional
    golden = "n/a" if f.golden is None else ("match" if f.golden.passed else f"max diff {f.golden.max_abs_diff:g}")
    print(f"{report.scenario} [{report.benchmark}, {report.mode.value}]")
    print(f"  CRC cif={'ok' if f.crc_ok_cif else 'FAIL'} lcd={'ok' if f.crc_ok_lcd else 'FAIL'}  golden {golden}")
    print(f"  latency {report.performance.latency * 1e3:.1f} ms  throughput {report.performance.throughput:.2f} FPS")
    print(f"  reports in {output_dir}")
    if args.strict and not report.passed:
        return EXIT_FUNCTIONAL
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=settings.LOG_LEVEL, format="%(levelname)s %(name)s: %(message)s")

    if not args.reproduce_table2 and not args.scenario:
        parser.print_usage(sys.stderr)
        print("cifsim: error: give a scenario file or --reproduce-table2", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.reproduce_table2:
            return _table2(args)
        return _scenario(args)
    except CONFIG_ERRORS as e:
        logger.error(str(e))
        return EXIT_CONFIG
    except SimulatorError as e:
        # framing / payload faults surfacing from the bus are functional failures
        logger.error(str(e))
        return EXIT_FUNCTIONAL


if __name__ == "__main__":
    sys.exit(main())
