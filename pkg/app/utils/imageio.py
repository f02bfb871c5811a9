"""
Netpbm readers and writers: binary PGM (P5) and PPM (P6), 8 or 16 bits per sample.

16-bit samples are big-endian, as the format requires; the bus and CRC use
little-endian byte order, so conversion happens only here.
"""

import re
from pathlib import Path
from typing import Tuple, Union

import numpy as np

from app.errors import FileFormatError
from app.services.frame_codec import Frame

PathLike = Union[str, Path]

_TOKEN = re.compile(rb"\s*(?:#[^\n]*\n\s*)*(\S+)")


def _parse_header(data: bytes, magic: bytes) -> Tuple[int, int, int, int]:
    """(width, height, maxval, offset of the first sample byte)."""
    if not data.startswith(magic):
        raise FileFormatError(f"Expected {magic.decode()} magic, got {data[:2]!r}")
    pos = len(magic)
    values = []
    for _ in range(3):
        match = _TOKEN.match(data, pos)
        if not match or not match.group(1).isdigit():
            raise FileFormatError("Truncated or non-numeric netpbm header")
        values.append(int(match.group(1)))
        pos = match.end()
    # exactly one whitespace byte separates maxval from the raster
    if pos >= len(data) or data[pos : pos + 1] not in (b" ", b"\t", b"\n", b"\r"):
        raise FileFormatError("Missing whitespace after maxval")
    width, height, maxval = values
    if width < 1 or height < 1 or not 0 < maxval < 65536:
        raise FileFormatError(f"Bad netpbm geometry {width}x{height}, maxval {maxval}")
    return width, height, maxval, pos + 1


def _samples(data: bytes, offset: int, count: int, maxval: int) -> Tuple[np.ndarray, int]:
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    need = count * dtype.itemsize
    if len(data) - offset < need:
        raise FileFormatError(f"Raster has {len(data) - offset} bytes, expected {need}")
    samples = np.frombuffer(data, dtype=dtype, count=count, offset=offset).astype(np.uint32)
    return samples, 16 if maxval > 255 else 8


def read_pgm(path: PathLike) -> Frame:
    data = Path(path).read_bytes()
    width, height, maxval, offset = _parse_header(data, b"P5")
    samples, bpp = _samples(data, offset, width * height, maxval)
    return Frame(width=width, height=height, bpp=bpp, pixels=samples)


def write_pgm(path: PathLike, frame: Frame) -> Path:
    if frame.bpp not in (8, 16):
        raise FileFormatError(f"PGM holds 8- or 16-bit samples, frame is {frame.bpp} bpp")
    maxval = (1 << frame.bpp) - 1
    dtype = ">u2" if frame.bpp == 16 else "u1"
    path = Path(path)
    path.write_bytes(f"P5\n{frame.width} {frame.height}\n{maxval}\n".encode("ascii") + frame.pixels.astype(dtype).tobytes())
    return path


def read_ppm(path: PathLike) -> Tuple[np.ndarray, int]:
    """RGB raster as (height, width, 3) uint32 plus the per-channel bit depth."""
    data = Path(path).read_bytes()
    width, height, maxval, offset = _parse_header(data, b"P6")
    samples, bpp = _samples(data, offset, width * height * 3, maxval)
    return samples.reshape(height, width, 3), bpp


def write_ppm(path: PathLike, rgb: np.ndarray, bpp: int = 8) -> Path:
    rgb = np.asarray(rgb)
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise FileFormatError(f"PPM needs an (H, W, 3) array, got {rgb.shape}")
    if bpp not in (8, 16):
        raise FileFormatError(f"PPM holds 8- or 16-bit samples, got {bpp}")
    if rgb.size and int(rgb.max()) >= (1 << bpp):
        raise FileFormatError(f"Sample values exceed {bpp} bits")
    dtype = ">u2" if bpp == 16 else "u1"
    height, width = rgb.shape[:2]
    path = Path(path)
    path.write_bytes(f"P6\n{width} {height}\n{(1 << bpp) - 1}\n".encode("ascii") + rgb.astype(dtype).tobytes())
    return path
