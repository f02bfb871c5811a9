"""
Band partitioning of an image across the VPU's vector workers.

STATIC hands each worker a contiguous block of bands up front. DYNAMIC keeps
a work queue: whichever worker frees up first takes the next band. Workers
are simulated logically; a cost model supplies per-band durations.
"""

from __future__ import annotations

import enum
import heapq
import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from app.errors import PartitionError

logger = logging.getLogger(__name__)

DEFAULT_WORKERS = 12


class PartitionMode(str, enum.Enum):
    STATIC = "static"
    DYNAMIC = "dynamic"


@dataclass(frozen=True)
class BandPartition:
    n_bands: int
    band_heights: Tuple[int, ...]
    assignment: Dict[int, Tuple[int, ...]]
    mode: PartitionMode
    dispatch_order: Tuple[Tuple[int, int], ...]
    finish_times: Tuple[float, ...]

    @property
    def band_height(self) -> int:
        """Nominal (largest) band height."""
        return max(self.band_heights)

    @property
    def height(self) -> int:
        return sum(self.band_heights)

    @property
    def makespan(self) -> float:
        return max(self.finish_times) if self.finish_times else 0.0

    def rows(self, band: int) -> Tuple[int, int]:
        start = sum(self.band_heights[:band])
        return start, start + self.band_heights[band]

    def bands_of(self, worker: int) -> Tuple[int, ...]:
        return self.assignment.get(worker, ())


def split_heights(height: int, n_bands: int, align: int = 1) -> Tuple[int, ...]:
    """Band heights that tile `height`, each a multiple of `align`, differing by at most one unit."""
    if n_bands < 1 or align < 1:
        raise PartitionError("Band count and alignment must be >= 1")
    if height % align:
        raise PartitionError(f"Height {height} is not a multiple of the {align}-line unit")
    units = height // align
    if units < n_bands:
        raise PartitionError(f"Cannot split {units} units of {align} lines into {n_bands} bands")
    base, extra = divmod(units, n_bands)
    return tuple((base + (1 if b < extra else 0)) * align for b in range(n_bands))


def partition_bands(
    height: int,
    n_bands: int,
    n_workers: int = DEFAULT_WORKERS,
    mode: PartitionMode = PartitionMode.STATIC,
    align: int = 1,
    costs: Optional[Sequence[float]] = None,
) -> BandPartition:
    """Split `height` lines into `n_bands` bands and assign them to `n_workers` workers."""
    if n_workers < 1:
        raise PartitionError(f"Need at least one worker, got {n_workers}")
    heights = split_heights(height, n_bands, align)
    if costs is None:
        costs = [float(h) for h in heights]
    if len(costs) != n_bands:
        raise PartitionError(f"Cost model covers {len(costs)} bands, partition has {n_bands}")

    assignment: Dict[int, List[int]] = {w: [] for w in range(n_workers)}
    finish = [0.0] * n_workers
    dispatch: List[Tuple[int, int]] = []

    if PartitionMode(mode) is PartitionMode.STATIC:
        per, extra = divmod(n_bands, n_workers)
        band = 0
        for w in range(n_workers):
            for _ in range(per + (1 if w < extra else 0)):
                assignment[w].append(band)
                dispatch.append((w, band))
                finish[w] += costs[band]
                band += 1
    else:
        free_at = [(0.0, w) for w in range(n_workers)]
        heapq.heapify(free_at)
        for band in range(n_bands):
            t, w = heapq.heappop(free_at)
            assignment[w].append(band)
            dispatch.append((w, band))
            finish[w] = t + costs[band]
            heapq.heappush(free_at, (finish[w], w))

    logger.debug(f"{PartitionMode(mode).value} partition: {n_bands} bands over {n_workers} workers")
    return BandPartition(
        n_bands=n_bands,
        band_heights=heights,
        assignment={w: tuple(b) for w, b in assignment.items()},
        mode=PartitionMode(mode),
        dispatch_order=tuple(dispatch),
        finish_times=tuple(finish),
    )


def run_bands(partition: BandPartition, band_fn: Callable[[int, int], None]) -> None:
    """Execute `band_fn(row_start, row_end)` for every band in dispatch order."""
    for _, band in partition.dispatch_order:
        band_fn(*partition.rows(band))
