"""
Floating-point convolution benchmark.

Correlation (no kernel flip) with zero-padded borders, float32 accumulation
in row-major kernel order, then round-half-even and clamp to [0, 255].
"""

import logging

import numpy as np

from app.errors import GeometryError, ParameterError
from app.services.frame_codec import Frame
from app.services.kernels.partition import DEFAULT_WORKERS, PartitionMode, partition_bands, run_bands

logger = logging.getLogger(__name__)

KERNEL_SIZES = (3, 5, 7, 9, 11, 13)
DEFAULT_BANDS = 36


def check_kernel(kernel) -> np.ndarray:
    kernel = np.asarray(kernel, dtype=np.float32)
    if kernel.ndim != 2 or kernel.shape[0] != kernel.shape[1]:
        raise ParameterError(f"Kernel must be square, got shape {kernel.shape}")
    if kernel.shape[0] not in KERNEL_SIZES:
        raise ParameterError(f"Kernel size {kernel.shape[0]} not in {KERNEL_SIZES}")
    return kernel


def box_kernel(k: int) -> np.ndarray:
    check_kernel(np.zeros((k, k)))
    return np.full((k, k), 1.0 / (k * k), dtype=np.float32)


def _correlate_rows(padded: np.ndarray, kernel: np.ndarray, r0: int, r1: int, width: int) -> np.ndarray:
    k = kernel.shape[0]
    acc = np.zeros((r1 - r0, width), dtype=np.float32)
    for di in range(k):
        for dj in range(k):
            acc += padded[r0 + di : r1 + di, dj : dj + width] * kernel[di, dj]
    return acc


def _pad(pixels: np.ndarray, k: int) -> np.ndarray:
    return np.pad(pixels.astype(np.float32), k // 2, mode="constant")


def correlate_float(pixels: np.ndarray, kernel) -> np.ndarray:
    """Unquantised float32 correlation of a 2-D array."""
    kernel = check_kernel(kernel)
    pixels = np.asarray(pixels)
    return _correlate_rows(_pad(pixels, kernel.shape[0]), kernel, 0, pixels.shape[0], pixels.shape[1])


def quantize_u8(values: np.ndarray) -> np.ndarray:
    return np.clip(np.rint(values), 0, 255).astype(np.uint32)


def fp_convolution(
    frame: Frame,
    kernel,
    n_bands: int = DEFAULT_BANDS,
    n_workers: int = DEFAULT_WORKERS,
    mode: PartitionMode = PartitionMode.STATIC,
) -> Frame:
    kernel = check_kernel(kernel)
    if frame.bpp != 8:
        raise GeometryError(f"Convolution expects 8 bpp input, got {frame.bpp}")
    k = kernel.shape[0]
    padded = _pad(frame.pixels, k)
    out = np.zeros((frame.height, frame.width), dtype=np.uint32)

    def convolve_band(r0: int, r1: int) -> None:
        out[r0:r1] = quantize_u8(_correlate_rows(padded, kernel, r0, r1, frame.width))

    partition = partition_bands(frame.height, min(n_bands, frame.height), n_workers, mode)
    run_bands(partition, convolve_band)
    logger.debug(f"Convolved {frame.width}x{frame.height} with {k}x{k} kernel")
    return Frame.from_array(out, 8)
