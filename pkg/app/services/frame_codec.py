"""
Frame codec — bit-exact conversion between frames, 32-bit bus words and
CRC-framed payloads.

Wire contract:
  * words pack pixels little-endian, lowest-index pixel in the lowest byte
    (4 px/word at 8 bpp, 2 at 16 bpp, 1 at 24 bpp with a zero top byte);
  * byte serialisation is row-major, multi-byte pixels little-endian;
  * the CRC-16/XMODEM of the body bytes travels in one extra trailer line
    (two when a line is a single byte), big-endian in the first two trailer
    bytes, remaining bytes zero. PROTOCOL.md has the full layout.
"""

from __future__ import annotations

import binascii
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from app.errors import GeometryError, MalformedPayloadError, MalformedStreamError

SUPPORTED_BPP = (8, 16, 24)
PIXELS_PER_WORD = {8: 4, 16: 2, 24: 1}
BYTES_PER_PIXEL = {8: 1, 16: 2, 24: 3}


def _check_bpp(bpp: int) -> None:
    if bpp not in SUPPORTED_BPP:
        raise GeometryError(f"Unsupported bit depth {bpp}; expected one of {SUPPORTED_BPP}")


@dataclass(frozen=True, eq=False)
class Frame:
    """Rectangular raster of unsigned pixels, stored as a (height, width) uint32 array."""

    width: int
    height: int
    bpp: int
    pixels: np.ndarray

    def __post_init__(self):
        _check_bpp(self.bpp)
        if self.width < 1 or self.height < 1:
            raise GeometryError(f"Frame must be at least 1x1, got {self.width}x{self.height}")
        pixels = np.asarray(self.pixels)
        if pixels.size != self.width * self.height:
            raise GeometryError(
                f"Frame {self.width}x{self.height} needs {self.width * self.height} pixels, got {pixels.size}"
            )
        if pixels.size and (pixels.min() < 0 or int(pixels.max()) >= (1 << self.bpp)):
            raise GeometryError(f"Pixel values must lie in [0, 2^{self.bpp})")
        pixels = pixels.astype(np.uint32).reshape(self.height, self.width)
        pixels.setflags(write=False)
        object.__setattr__(self, "pixels", pixels)

    @classmethod
    def from_array(cls, array: np.ndarray, bpp: int) -> "Frame":
        array = np.asarray(array)
        if array.ndim != 2:
            raise GeometryError(f"Expected a 2-D array, got shape {array.shape}")
        return cls(width=array.shape[1], height=array.shape[0], bpp=bpp, pixels=array)

    @property
    def pixel_count(self) -> int:
        return self.width * self.height

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Frame):
            return NotImplemented
        return (
            (self.width, self.height, self.bpp) == (other.width, other.height, other.bpp)
            and np.array_equal(self.pixels, other.pixels)
        )


@dataclass(frozen=True)
class WordStream:
    """32-bit bus words as produced by the FSM stage of the image buffer."""

    words: np.ndarray
    bpp: int
    pixel_count: int

    def __post_init__(self):
        _check_bpp(self.bpp)
        words = np.asarray(self.words, dtype=np.uint32).ravel()
        object.__setattr__(self, "words", words)


@dataclass(frozen=True, eq=False)
class FramedPayload:
    """A body frame plus the trailer line(s) that carry its CRC."""

    body: Frame
    trailer: np.ndarray

    def __post_init__(self):
        rows = trailer_lines(self.body.width, self.body.bpp)
        trailer = np.asarray(self.trailer, dtype=np.uint32)
        if trailer.size != rows * self.body.width:
            raise MalformedPayloadError(
                f"Trailer has {trailer.size} pixels, expected {rows} line(s) of {self.body.width}"
            )
        object.__setattr__(self, "trailer", trailer.reshape(rows, self.body.width))

    @property
    def lines(self) -> int:
        return self.body.height + self.trailer.shape[0]

    def to_wire_frame(self) -> Frame:
        """Body and trailer stacked into the frame that crosses the bus."""
        stacked = np.vstack([self.body.pixels, self.trailer])
        return Frame.from_array(stacked, self.body.bpp)

    @classmethod
    def from_wire_frame(cls, wire: Frame) -> "FramedPayload":
        rows = trailer_lines(wire.width, wire.bpp)
        if wire.height < rows + 1:
            raise MalformedPayloadError(
                f"Framed payload needs at least {rows + 1} lines, got {wire.height}"
            )
        body = Frame.from_array(wire.pixels[:-rows], wire.bpp)
        return cls(body=body, trailer=wire.pixels[-rows:])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FramedPayload):
            return NotImplemented
        return self.body == other.body and np.array_equal(self.trailer, other.trailer)


# ── Words ──

def pixels_to_words(frame: Frame) -> WordStream:
    """Pack pixels into 32-bit words (LCD FSM direction)."""
    ppw = PIXELS_PER_WORD[frame.bpp]
    flat = frame.pixels.ravel()
    n_words = -(-flat.size // ppw)
    padded = np.zeros(n_words * ppw, dtype=np.uint32)
    padded[: flat.size] = flat
    lanes = padded.reshape(n_words, ppw)
    shifts = np.arange(ppw, dtype=np.uint32) * np.uint32(frame.bpp)
    words = np.bitwise_or.reduce(lanes << shifts, axis=1).astype(np.uint32)
    return WordStream(words=words, bpp=frame.bpp, pixel_count=flat.size)


def words_to_pixels(stream: WordStream, expected_pixels: int) -> np.ndarray:
    """Unpack 32-bit words back into a flat pixel array (CIF FSM direction)."""
    ppw = PIXELS_PER_WORD[stream.bpp]
    expected_words = -(-expected_pixels // ppw)
    if stream.words.size != expected_words:
        raise MalformedStreamError(
            f"{expected_pixels} pixels at {stream.bpp} bpp need {expected_words} words, "
            f"stream has {stream.words.size}"
        )
    if expected_pixels == 0:
        return np.zeros(0, dtype=np.uint32)
    mask = np.uint32((1 << stream.bpp) - 1)
    shifts = np.arange(ppw, dtype=np.uint32) * np.uint32(stream.bpp)
    lanes = (stream.words[:, None] >> shifts) & mask
    return lanes.ravel()[:expected_pixels].astype(np.uint32)


# ── Bytes & CRC ──

def crc16_xmodem(data: bytes) -> int:
    """CRC-16/XMODEM: poly 0x1021, init 0x0000, unreflected, no final XOR."""
    return binascii.crc_hqx(bytes(data), 0)


def pixels_to_bytes(pixels: np.ndarray, bpp: int) -> bytes:
    flat = np.asarray(pixels).ravel()
    if bpp == 8:
        return flat.astype(np.uint8).tobytes()
    if bpp == 16:
        return flat.astype("<u2").tobytes()
    return flat.astype("<u4").view(np.uint8).reshape(-1, 4)[:, :3].tobytes()


def bytes_to_pixels(data: bytes, bpp: int) -> np.ndarray:
    _check_bpp(bpp)
    raw = np.frombuffer(bytes(data), dtype=np.uint8)
    if raw.size % BYTES_PER_PIXEL[bpp]:
        raise MalformedStreamError(f"{raw.size} bytes is not a whole number of {bpp} bpp pixels")
    if bpp == 8:
        return raw.astype(np.uint32)
    if bpp == 16:
        return raw.view("<u2").astype(np.uint32)
    triples = raw.reshape(-1, 3).astype(np.uint32)
    return triples[:, 0] | (triples[:, 1] << 8) | (triples[:, 2] << 16)


def frame_to_bytes(frame: Frame) -> bytes:
    """Canonical byte serialisation over which the CRC is computed."""
    return pixels_to_bytes(frame.pixels, frame.bpp)


def frame_from_bytes(data: bytes, width: int, height: int, bpp: int) -> Frame:
    pixels = bytes_to_pixels(data, bpp)
    if pixels.size != width * height:
        raise MalformedStreamError(
            f"{len(data)} bytes do not make a {width}x{height} frame at {bpp} bpp"
        )
    return Frame(width=width, height=height, bpp=bpp, pixels=pixels)


# ── CRC trailer ──

def trailer_lines(width: int, bpp: int) -> int:
    """Lines needed for the 16-bit CRC: one, or two when a line is a single byte."""
    _check_bpp(bpp)
    return -(-2 // (width * BYTES_PER_PIXEL[bpp]))


def _trailer_for(crc: int, width: int, bpp: int) -> np.ndarray:
    rows = trailer_lines(width, bpp)
    raw = bytearray(rows * width * BYTES_PER_PIXEL[bpp])
    raw[0] = (crc >> 8) & 0xFF
    raw[1] = crc & 0xFF
    return bytes_to_pixels(bytes(raw), bpp).reshape(rows, width)


def append_crc_trailer(frame: Frame) -> FramedPayload:
    """Extend the frame by trailer line(s) carrying CRC-16/XMODEM of the body bytes."""
    crc = crc16_xmodem(frame_to_bytes(frame))
    return FramedPayload(body=frame, trailer=_trailer_for(crc, frame.width, frame.bpp))


def trailer_crc(payload: FramedPayload) -> int:
    raw = pixels_to_bytes(payload.trailer, payload.body.bpp)
    return (raw[0] << 8) | raw[1]


def verify_and_strip(payload: FramedPayload) -> Tuple[Frame, bool]:
    """Recompute the body CRC and compare it with the trailer.

    The trailer padding must also be zero for the payload to verify. The body
    is returned whatever the verdict.
    """
    if payload.lines < 2:
        raise MalformedPayloadError("Framed payload needs at least 2 lines")
    raw = pixels_to_bytes(payload.trailer, payload.body.bpp)
    received = (raw[0] << 8) | raw[1]
    computed = crc16_xmodem(frame_to_bytes(payload.body))
    padding_clean = not any(raw[2:])
    return payload.body, (received == computed and padding_clean)
