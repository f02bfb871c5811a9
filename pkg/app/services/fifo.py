"""
Dual-clock pixel FIFO and a discrete-event model of clock domain crossing.

Time is integer picoseconds; clock edge k of a clock at f Hz sits at
floor(k * 1e12 / f). Each side advances on its own grid. Metastability is
not modelled, only rate mismatch and occupancy.
"""

from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Deque, List, Optional, Sequence

from app.errors import ConfigurationError

logger = logging.getLogger(__name__)

PS_PER_S = 10**12


@dataclass
class DualClockFifo:
    capacity: int
    write_clock: float
    read_clock: float
    pushed: int = 0
    popped: int = 0
    overflows: int = 0
    underflows: int = 0
    max_occupancy: int = 0
    _items: Deque[Any] = field(default_factory=deque, repr=False)

    def __post_init__(self):
        if self.capacity < 1:
            raise ConfigurationError(f"FIFO capacity must be >= 1, got {self.capacity}")
        if self.write_clock <= 0 or self.read_clock <= 0:
            raise ConfigurationError("FIFO clocks must be positive")

    @property
    def occupancy(self) -> int:
        return len(self._items)

    def push(self, item: Any) -> bool:
        """Returns False (and counts an overflow) when full."""
        self.pushed += 1
        if len(self._items) >= self.capacity:
            self.overflows += 1
            return False
        self._items.append(item)
        self.max_occupancy = max(self.max_occupancy, len(self._items))
        return True

    def pop(self) -> Optional[Any]:
        """Returns None (and counts an underflow) when empty."""
        if not self._items:
            self.underflows += 1
            return None
        self.popped += 1
        return self._items.popleft()


def fifo_push(fifo: DualClockFifo, item: Any) -> bool:
    return fifo.push(item)


def fifo_pop(fifo: DualClockFifo) -> Optional[Any]:
    return fifo.pop()


def rate_backlog(pixel_count: int, write_hz: float, read_hz: float) -> int:
    """Entries left behind after one frame when the writer outruns the reader."""
    if write_hz <= read_hz:
        return 0
    return math.ceil(pixel_count * (1.0 - read_hz / write_hz))


def size_fifo(width: int, pixel_count: int, write_hz: float, read_hz: float, lines: int = 2) -> int:
    """Default capacity: `lines` full lines, grown to absorb one frame's rate backlog."""
    return max(lines * width, rate_backlog(pixel_count, write_hz, read_hz) + 1)


def max_error_free_frame(write_hz: float, read_hz: float, capacity: int) -> Optional[int]:
    """Largest frame (pixels) that crosses with no overflow; None means any size."""
    if write_hz <= read_hz:
        return None
    return int((capacity - 1) / (1.0 - read_hz / write_hz))


@dataclass
class CdcReport:
    received: List[Any]
    pushed: int
    popped: int
    overflows: int
    underflows: int
    max_occupancy: int
    residual: int
    duration_ps: int

    @property
    def lossless(self) -> bool:
        return self.overflows == 0


def _edge(k: int, hz: int) -> int:
    return (k * PS_PER_S) // hz


def simulate_cdc_transfer(items: Sequence[Any], fifo: DualClockFifo) -> CdcReport:
    """Writer pushes one item per write edge, reader pops one per read edge.

    Simultaneous edges are ordered write-first. The run ends once the writer
    is done and the FIFO has drained.
    """
    write_hz = int(round(fifo.write_clock))
    read_hz = int(round(fifo.read_clock))
    received: List[Any] = []
    k_w = k_r = 0
    now = 0
    n = len(items)
    while k_w < n or fifo.occupancy:
        t_w = _edge(k_w, write_hz) if k_w < n else None
        t_r = _edge(k_r, read_hz)
        if t_w is not None and t_w <= t_r:
            now = t_w
            fifo.push(items[k_w])
            k_w += 1
        else:
            now = t_r
            item = fifo.pop()
            if item is not None:
                received.append(item)
            k_r += 1
    if fifo.overflows:
        logger.warning(
            f"FIFO overflowed {fifo.overflows} times ({fifo.write_clock / 1e6:.0f} MHz -> "
            f"{fifo.read_clock / 1e6:.0f} MHz, capacity {fifo.capacity})"
        )
    return CdcReport(
        received=received,
        pushed=fifo.pushed,
        popped=fifo.popped,
        overflows=fifo.overflows,
        underflows=fifo.underflows,
        max_occupancy=fifo.max_occupancy,
        residual=fifo.occupancy,
        duration_ps=now,
    )
