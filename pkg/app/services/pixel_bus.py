"""
Pixel bus — cycle-accurate CIF (FPGA→VPU) and LCD (VPU→FPGA) links.

A frame on the wire is one VSYNC_START, then per line one HSYNC_START
followed by `width` PIXEL events (one per clock), then FRAME_END. There is
no blanking: VSYNC and the first HSYNC share cycle 0 with the first pixel,
each HSYNC shares its cycle with the first pixel of its line, and FRAME_END
sits on the cycle after the last pixel.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Mapping, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from app.config import settings
from app.errors import AddressingError, ConfigurationError, FramingError, HarnessError
from app.schemas.bus import BusConfig
from app.services.fifo import CdcReport, DualClockFifo, simulate_cdc_transfer, size_fifo
from app.services.frame_codec import (
    SUPPORTED_BPP,
    Frame,
    FramedPayload,
    append_crc_trailer,
    trailer_crc,
    trailer_lines,
    verify_and_strip,
)

logger = logging.getLogger(__name__)


class EventKind(enum.IntEnum):
    VSYNC_START = 0
    HSYNC_START = 1
    PIXEL = 2
    FRAME_END = 3


class BusEvent(NamedTuple):
    cycle: int
    kind: EventKind
    value: int


@dataclass(frozen=True, eq=False)
class BusEventStream:
    """Clocked event sequence held column-wise so memory stays O(pixels)."""

    cycles: np.ndarray
    kinds: np.ndarray
    values: np.ndarray
    bpp: int

    def __post_init__(self):
        cycles = np.asarray(self.cycles, dtype=np.int64)
        kinds = np.asarray(self.kinds, dtype=np.uint8)
        values = np.asarray(self.values, dtype=np.uint32)
        if not (cycles.shape == kinds.shape == values.shape):
            raise FramingError("Event columns differ in length")
        for column in (cycles, kinds, values):
            column.setflags(write=False)
        object.__setattr__(self, "cycles", cycles)
        object.__setattr__(self, "kinds", kinds)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return int(self.cycles.size)

    def __iter__(self) -> Iterator[BusEvent]:
        for cycle, kind, value in zip(self.cycles.tolist(), self.kinds.tolist(), self.values.tolist()):
            yield BusEvent(cycle, EventKind(kind), value)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BusEventStream):
            return NotImplemented
        return (
            self.bpp == other.bpp
            and np.array_equal(self.cycles, other.cycles)
            and np.array_equal(self.kinds, other.kinds)
            and np.array_equal(self.values, other.values)
        )

    @property
    def pixel_mask(self) -> np.ndarray:
        return self.kinds == EventKind.PIXEL

    @property
    def final_cycle(self) -> int:
        return int(self.cycles[-1]) if self.cycles.size else 0

    def count(self, kind: EventKind) -> int:
        return int(np.count_nonzero(self.kinds == kind))


# ── Serialisation ──

def _expected_layout(width: int, lines: int) -> Tuple[np.ndarray, np.ndarray]:
    """Kinds and cycles of a well-formed stream of `lines` lines."""
    line_kinds = np.full(width + 1, EventKind.PIXEL, dtype=np.uint8)
    line_kinds[0] = EventKind.HSYNC_START
    line_cycles = np.concatenate([[0], np.arange(width)]).astype(np.int64)
    offsets = (np.arange(lines, dtype=np.int64) * width)[:, None]
    kinds = np.concatenate([
        [EventKind.VSYNC_START],
        np.tile(line_kinds, lines),
        [EventKind.FRAME_END],
    ]).astype(np.uint8)
    cycles = np.concatenate([
        [0],
        (line_cycles[None, :] + offsets).ravel(),
        [lines * width],
    ]).astype(np.int64)
    return kinds, cycles


def _check_geometry(payload: FramedPayload, config: BusConfig) -> None:
    body = payload.body
    if (body.width, payload.lines, body.bpp) != (config.width, config.height, config.bpp):
        raise ConfigurationError(
            f"Payload {body.width}x{payload.lines}@{body.bpp}bpp does not match bus "
            f"{config.width}x{config.height}@{config.bpp}bpp"
        )


def serialize_frame(payload: FramedPayload, config: BusConfig) -> BusEventStream:
    """CIF/LCD Tx: turn a framed payload into vsync/hsync/pixel events."""
    _check_geometry(payload, config)
    kinds, cycles = _expected_layout(config.width, config.height)
    values = np.zeros(kinds.size, dtype=np.uint32)
    values[kinds == EventKind.PIXEL] = payload.to_wire_frame().pixels.ravel()
    return BusEventStream(cycles=cycles, kinds=kinds, values=values, bpp=config.bpp)


def deserialize_frame(stream: BusEventStream, config: BusConfig) -> FramedPayload:
    """CIF/LCD Rx: rebuild the framed payload, checking sync framing on the way."""
    kinds, cycles = _expected_layout(config.width, config.height)
    n = min(kinds.size, len(stream))
    bad = np.flatnonzero((stream.kinds[:n] != kinds[:n]) | (stream.cycles[:n] != cycles[:n]))
    if bad.size:
        i = int(bad[0])
        raise FramingError(
            f"Expected {EventKind(int(kinds[i])).name} at event {i}, "
            f"got {EventKind(int(stream.kinds[i])).name}",
            cycle=int(stream.cycles[i]),
        )
    if len(stream) != kinds.size:
        cycle = int(stream.cycles[n]) if len(stream) > n else stream.final_cycle
        raise FramingError(
            f"Stream has {len(stream)} events, a {config.width}x{config.height} frame needs {kinds.size}",
            cycle=cycle,
        )
    pixels = stream.values[stream.pixel_mask]
    if pixels.size and int(pixels.max()) >= (1 << config.bpp):
        raise FramingError(f"Pixel value wider than {config.bpp} bits on the bus")
    wire = Frame(width=config.width, height=config.height, bpp=config.bpp, pixels=pixels)
    return FramedPayload.from_wire_frame(wire)


def inject_errors(stream: BusEventStream, flip_spec: Sequence[Tuple[int, int]]) -> BusEventStream:
    """Flip the given (cycle, bit_index) pixel bits; sync events are untouched."""
    if not flip_spec:
        return stream
    pixel_index = np.flatnonzero(stream.pixel_mask)
    pixel_cycles = stream.cycles[pixel_index]
    values = stream.values.copy()
    for cycle, bit in flip_spec:
        if not 0 <= bit < stream.bpp:
            raise HarnessError(f"Bit index {bit} outside a {stream.bpp}-bit pixel")
        pos = int(np.searchsorted(pixel_cycles, cycle))
        if pos >= pixel_cycles.size or pixel_cycles[pos] != cycle:
            raise HarnessError(f"Cycle {cycle} carries no PIXEL event")
        values[pixel_index[pos]] ^= np.uint32(1 << bit)
    return BusEventStream(cycles=stream.cycles, kinds=stream.kinds, values=values, bpp=stream.bpp)


def transfer_time(pixel_count: int, frequency: float) -> float:
    """Seconds to move `pixel_count` pixels at one pixel per clock."""
    if frequency <= 0:
        raise ConfigurationError(f"Bus frequency must be positive, got {frequency}")
    return pixel_count / frequency


def io_frame_rate(pixel_count: int, frequency: float) -> float:
    """Frames/s of a pure transfer with no processing (≈48 FPS for 1 MPixel at 50 MHz)."""
    duration = transfer_time(pixel_count, frequency)
    return 1.0 / duration if duration else float("inf")


# ── Registers ──

CONTROL_REGISTERS = ("frame_width", "frame_height", "bpp")
STATUS_REGISTERS = ("tx_crc", "rx_crc", "crc_ok", "frames_transmitted", "frames_received")


class RegisterFile:
    """Control and status registers of one link.

    Control writes are staged and only become active at a frame boundary
    (`latch`). Status registers are read-only for the host.
    """

    def __init__(self, frame_width: int, frame_height: int, bpp: int):
        self._control: Dict[str, int] = {}
        self._pending: Dict[str, int] = {}
        for name, value in zip(CONTROL_REGISTERS, (frame_width, frame_height, bpp)):
            self._validate(name, value)
            self._control[name] = int(value)
        self._status: Dict[str, object] = {
            "tx_crc": 0,
            "rx_crc": 0,
            "crc_ok": False,
            "frames_transmitted": 0,
            "frames_received": 0,
        }

    @staticmethod
    def _validate(name: str, value: int) -> None:
        if name == "bpp" and value not in SUPPORTED_BPP:
            raise ConfigurationError(f"bpp must be one of {SUPPORTED_BPP}, got {value}")
        if name in ("frame_width", "frame_height") and value < 1:
            raise ConfigurationError(f"{name} must be >= 1, got {value}")

    def read(self, name: str):
        if name in self._control:
            return self._control[name]
        if name in self._status:
            return self._status[name]
        raise AddressingError(f"Unknown register '{name}'")

    def write(self, name: str, value: int) -> None:
        if name in STATUS_REGISTERS:
            raise AddressingError(f"Register '{name}' is read-only")
        if name not in CONTROL_REGISTERS:
            raise AddressingError(f"Unknown register '{name}'")
        self._validate(name, value)
        self._pending[name] = int(value)

    def latch(self) -> Dict[str, int]:
        """Frame boundary: make staged control writes active."""
        changed = dict(self._pending)
        self._control.update(self._pending)
        self._pending.clear()
        if changed:
            logger.debug(f"Latched control registers {changed}")
        return changed

    def record_tx(self, crc: int) -> None:
        self._status["tx_crc"] = crc
        self._status["frames_transmitted"] += 1

    def record_rx(self, crc: int, ok: bool) -> None:
        self._status["rx_crc"] = crc
        self._status["crc_ok"] = bool(ok)
        self._status["frames_received"] += 1

    def dump(self) -> dict:
        return {
            "control": dict(self._control),
            "pending": dict(self._pending),
            "status": dict(self._status),
        }


def register_read(regfile: RegisterFile, name: str):
    return regfile.read(name)


def register_write(regfile: RegisterFile, name: str, value: int) -> None:
    regfile.write(name, value)


# ── Links ──

@dataclass
class FrameSlot:
    """Where one frame of a sequence sat on the wire."""

    start_cycle: int
    end_cycle: int
    bpp: int
    stream: BusEventStream


@dataclass
class PixelLink:
    """One direction of the CIF/LCD pair: transmitter, receiver and their registers."""

    name: str
    frequency: float
    registers: RegisterFile
    cycle: int = field(default=0, init=False)

    @classmethod
    def for_frame(cls, name: str, frequency: float, frame: Frame) -> "PixelLink":
        return cls(name, frequency, RegisterFile(frame.width, frame.height, frame.bpp))

    @property
    def frame_geometry(self) -> Tuple[int, int, int]:
        regs = self.registers
        return regs.read("frame_width"), regs.read("frame_height"), regs.read("bpp")

    @property
    def config(self) -> BusConfig:
        width, height, bpp = self.frame_geometry
        return BusConfig(frequency=self.frequency, bpp=bpp, width=width, height=height + trailer_lines(width, bpp))

    def transmit(self, frame: Frame) -> BusEventStream:
        self.registers.latch()
        config = self.config
        width, height, bpp = self.frame_geometry
        if (frame.width, frame.height, frame.bpp) != (width, height, bpp):
            raise ConfigurationError(
                f"{self.name}: frame {frame.width}x{frame.height}@{frame.bpp}bpp does not match "
                f"control registers {width}x{height}@{bpp}bpp"
            )
        payload = append_crc_trailer(frame)
        stream = serialize_frame(payload, config)
        self.registers.record_tx(trailer_crc(payload))
        self.cycle += stream.final_cycle
        logger.info(f"{self.name}: sent {frame.width}x{frame.height}@{frame.bpp}bpp in {stream.final_cycle} cycles")
        return stream

    def receive(self, stream: BusEventStream) -> Tuple[Frame, bool]:
        payload = deserialize_frame(stream, self.config)
        body, ok = verify_and_strip(payload)
        self.registers.record_rx(trailer_crc(payload), ok)
        if not ok:
            logger.warning(f"{self.name}: CRC mismatch on received frame")
        return body, ok

    def transmit_sequence(
        self,
        frames: Sequence[Frame],
        writes: Optional[Mapping[int, Sequence[Tuple[str, int]]]] = None,
    ) -> List[FrameSlot]:
        """Send frames back to back; `writes` maps a global cycle to register writes issued then."""
        pending = sorted((writes or {}).items())
        slots: List[FrameSlot] = []
        for frame in frames:
            start = self.cycle
            stream = self.transmit(frame)
            end = self.cycle
            while pending and pending[0][0] < end:
                _, ops = pending.pop(0)
                for name, value in ops:
                    self.registers.write(name, value)
            slots.append(FrameSlot(start, end, stream.bpp, stream))
        return slots


@dataclass
class LoopbackResult:
    frame: Frame
    cif_crc_ok: bool
    lcd_crc_ok: bool
    cif_time: float
    lcd_time: float
    registers: dict
    cdc: CdcReport


def loopback(
    frame: Frame,
    cif_hz: float = 50e6,
    lcd_hz: float = 50e6,
    fifo_lines: Optional[int] = None,
    fifo_capacity: Optional[int] = None,
) -> LoopbackResult:
    """FPGA→VPU over CIF, VPU echoes, VPU→FPGA over LCD, each link on its own clock.

    LCD pixels cross from the LCD clock into the FPGA core clock (the CIF clock)
    through a dual-clock FIFO before the CRC check. The FIFO is sized from
    `fifo_lines` unless `fifo_capacity` pins it; dropped pixels leave the
    receiver short and zero-filled, so they show in the frame and the CRC verdict.
    """
    cif = PixelLink.for_frame("cif", cif_hz, frame)
    lcd = PixelLink.for_frame("lcd", lcd_hz, frame)
    received, cif_ok = cif.receive(cif.transmit(frame))
    lcd_stream = lcd.transmit(received)

    mask = lcd_stream.pixel_mask
    wire_pixels = lcd_stream.values[mask]
    capacity = fifo_capacity or size_fifo(
        frame.width, wire_pixels.size, lcd_hz, cif_hz, fifo_lines or settings.FIFO_LINES
    )
    cdc = simulate_cdc_transfer(wire_pixels.tolist(), DualClockFifo(capacity, lcd_hz, cif_hz))
    arrived = np.zeros(wire_pixels.size, dtype=np.uint32)
    arrived[: len(cdc.received)] = cdc.received
    values = lcd_stream.values.copy()
    values[mask] = arrived
    core_stream = BusEventStream(cycles=lcd_stream.cycles, kinds=lcd_stream.kinds, values=values, bpp=lcd_stream.bpp)
    returned, lcd_ok = lcd.receive(core_stream)

    lines = frame.height + trailer_lines(frame.width, frame.bpp)
    return LoopbackResult(
        frame=returned,
        cif_crc_ok=cif_ok,
        lcd_crc_ok=lcd_ok,
        cif_time=transfer_time(frame.width * lines, cif_hz),
        lcd_time=transfer_time(frame.width * lines, lcd_hz),
        registers={"cif": cif.registers.dump(), "lcd": lcd.registers.dump()},
        cdc=cdc,
    )
