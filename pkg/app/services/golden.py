"""Golden-image comparison, the Host PC's check of returned results."""

import hashlib
import logging

import numpy as np

from app.errors import GeometryError
from app.schemas.scenario import GoldenReport
from app.services.frame_codec import Frame, frame_to_bytes

logger = logging.getLogger(__name__)


def compare_golden(output: Frame, golden: Frame, tolerance: float = 0.0) -> GoldenReport:
    """Per-pixel absolute difference; passes iff the largest one is within `tolerance`."""
    if (output.width, output.height) != (golden.width, golden.height):
        raise GeometryError(
            f"Output {output.width}x{output.height} and golden {golden.width}x{golden.height} differ in size"
        )
    diff = np.abs(output.pixels.astype(np.int64) - golden.pixels.astype(np.int64))
    max_diff = float(diff.max())
    report = GoldenReport(
        max_abs_diff=max_diff,
        mean_abs_diff=float(diff.mean()),
        mismatched_pixels=int(np.count_nonzero(diff)),
        fraction_within=float(np.count_nonzero(diff <= tolerance)) / diff.size,
        tolerance=tolerance,
        passed=max_diff <= tolerance,
    )
    if not report.passed:
        logger.warning(f"Golden mismatch: max |diff| {max_diff:g} > {tolerance:g} on {report.mismatched_pixels} pixel(s)")
    return report


def frame_checksum(frame: Frame) -> str:
    """sha256 over geometry and canonical pixel bytes."""
    digest = hashlib.sha256(f"{frame.width}x{frame.height}@{frame.bpp}:".encode("ascii"))
    digest.update(frame_to_bytes(frame))
    return digest.hexdigest()
