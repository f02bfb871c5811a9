"""Averaging binning: 2×2 regions, stride 2, floor of the mean."""

import logging

import numpy as np

from app.errors import GeometryError
from app.services.frame_codec import Frame
from app.services.kernels.partition import DEFAULT_WORKERS, PartitionMode, partition_bands, run_bands

logger = logging.getLogger(__name__)

DEFAULT_BANDS = 36


def bin_reference(pixels: np.ndarray) -> np.ndarray:
    """Single-worker 2×2 floor-mean over an even-sized 8-bit array."""
    p = pixels.astype(np.uint16)
    total = p[0::2, 0::2] + p[0::2, 1::2] + p[1::2, 0::2] + p[1::2, 1::2]
    return (total // 4).astype(np.uint32)


def average_binning(
    frame: Frame,
    n_bands: int = DEFAULT_BANDS,
    n_workers: int = DEFAULT_WORKERS,
    mode: PartitionMode = PartitionMode.STATIC,
) -> Frame:
    """Band-parallel binning; the output does not depend on the partition."""
    if frame.bpp != 8:
        raise GeometryError(f"Binning expects 8 bpp input, got {frame.bpp}")
    if frame.width % 2 or frame.height % 2:
        raise GeometryError(f"Binning needs even dimensions, got {frame.width}x{frame.height}")

    # small fixtures have fewer row pairs than the 36 production bands
    bands = min(n_bands, frame.height // 2)
    partition = partition_bands(frame.height, bands, n_workers, mode, align=2)
    out = np.zeros((frame.height // 2, frame.width // 2), dtype=np.uint32)

    def bin_band(r0: int, r1: int) -> None:
        out[r0 // 2 : r1 // 2] = bin_reference(frame.pixels[r0:r1])

    run_bands(partition, bin_band)
    logger.debug(f"Binned {frame.width}x{frame.height} over {bands} bands")
    return Frame.from_array(out, 8)
