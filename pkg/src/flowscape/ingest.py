"""Raw record ingestion: pings or pre-aggregated visits to spectra and flows.

Two CSV schemas are accepted. Schema A is raw pings (user_id,day,x_m,y_m),
which get grid-binned and reduced to per-user visit frequencies; schema B is
already-aggregated visits (user_id,home_cell,dest_cell,f). Everything
downstream is canonicalized, so output bytes do not depend on input order
or worker partitioning.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Iterator

import numpy as np

from .errors import OutOfGrid, ParseError
from .grid import (GridSpec, cell_distances_km, cell_of, ring_cell_counts,
                   ring_offset_table, rings_of)
from .law import DEFAULT_FREQ_TABLE, F_MAX, FrequencyGroupTable, VisitationSpectrum
from .synth import VisitTable

PING_HEADER = "user_id,day,x_m,y_m"
VISIT_HEADER = "user_id,home_cell,dest_cell,f"


@dataclass(frozen=True)
class PingRecord:
    user_id: str
    day: int
    x_m: float
    y_m: float
    line: int = 0  # 1-based source line, for error reporting


def _clean(line: str) -> str:
    return line.rstrip("\r\n")


def parse_pings(lines: Iterable[str],
                on_error: Callable[[ParseError], None] | None = None) -> Iterator[PingRecord]:
    """Parse schema-A ping lines in file order.

    Malformed lines raise ParseError with their line number; passing
    on_error instead reports and skips them so a whole file can be
    triaged in one pass. An empty input yields nothing."""
    def report(err: ParseError) -> None:
        if on_error is None:
            raise err
        on_error(err)

    for n, raw in enumerate(lines, start=1):
        line = _clean(raw)
        if n == 1:
            if line != PING_HEADER:
                report(ParseError(n, f"expected header '{PING_HEADER}', got '{line}'"))
            continue
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 4:
            report(ParseError(n, f"expected 4 columns, got {len(parts)}"))
            continue
        user, day_s, x_s, y_s = parts
        try:
            day = int(day_s)
            x = float(x_s)
            y = float(y_s)
        except ValueError:
            report(ParseError(n, f"non-numeric field in '{line}'"))
            continue
        if not 1 <= day <= 31:
            report(ParseError(n, f"day {day} outside 1..31"))
            continue
        yield PingRecord(user, day, x, y, line=n)


def parse_visits(lines: Iterable[str],
                 on_error: Callable[[ParseError], None] | None = None) -> VisitTable:
    """Parse schema-B visit lines into a VisitTable (canonical file order)."""
    def report(err: ParseError) -> None:
        if on_error is None:
            raise err
        on_error(err)

    codes: dict[str, int] = {}
    labels: list[str] = []
    homes: list[int] = []
    dests: list[int] = []
    freqs: list[int] = []
    users: list[int] = []
    for n, raw in enumerate(lines, start=1):
        line = _clean(raw)
        if n == 1:
            if line != VISIT_HEADER:
                report(ParseError(n, f"expected header '{VISIT_HEADER}', got '{line}'"))
            continue
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 4:
            report(ParseError(n, f"expected 4 columns, got {len(parts)}"))
            continue
        try:
            home = int(parts[1])
            dest = int(parts[2])
            f = int(parts[3])
        except ValueError:
            report(ParseError(n, f"non-numeric field in '{line}'"))
            continue
        if not 1 <= f <= F_MAX:
            report(ParseError(n, f"frequency {f} outside 1..{F_MAX}"))
            continue
        if dest == home:
            report(ParseError(n, "destination equals home"))
            continue
        user = parts[0]
        if user not in codes:
            codes[user] = len(labels)
            labels.append(user)
        users.append(codes[user])
        homes.append(home)
        dests.append(dest)
        freqs.append(f)
    return VisitTable(np.array(homes, dtype=np.int64), np.array(dests, dtype=np.int64),
                      np.array(freqs, dtype=np.int64), np.array(users, dtype=np.int64),
                      labels)


def aggregate_visits(pings: Iterable[PingRecord], grid: GridSpec, *,
                     clip: bool = False, stats: dict | None = None) -> VisitTable:
    """Reduce pings to per-user visit records.

    A user's frequency at a cell is the number of distinct active days
    there (capped at 30); home is the cell with the highest frequency,
    ties broken toward the lowest cell id. One visit record is emitted per
    (user, non-home cell). Out-of-grid pings raise OutOfGrid with the line
    number unless clip=True, which drops and counts them."""
    day_bits: dict[str, dict[int, int]] = {}
    clipped = 0
    for p in pings:
        try:
            cell = cell_of(p.x_m, p.y_m, grid)
        except OutOfGrid:
            if clip:
                clipped += 1
                continue
            raise OutOfGrid(f"ping at ({p.x_m}, {p.y_m}) outside grid", line=p.line)
        user_cells = day_bits.setdefault(p.user_id, {})
        user_cells[cell] = user_cells.get(cell, 0) | (1 << p.day)
    if stats is not None:
        stats["clipped_pings"] = clipped

    codes: list[int] = []
    labels: list[str] = []
    homes: list[int] = []
    dests: list[int] = []
    freqs: list[int] = []
    for user in sorted(day_bits):
        cells = day_bits[user]
        f_of = {c: min(bits.bit_count(), F_MAX) for c, bits in cells.items()}
        home = min(f_of, key=lambda c: (-f_of[c], c))
        emitted = False
        for c in sorted(f_of):
            if c == home:
                continue
            codes.append(len(labels))
            homes.append(home)
            dests.append(c)
            freqs.append(f_of[c])
            emitted = True
        if emitted:
            labels.append(user)
    return VisitTable(np.array(homes, dtype=np.int64), np.array(dests, dtype=np.int64),
                      np.array(freqs, dtype=np.int64), np.array(codes, dtype=np.int64),
                      labels)


def build_spectra(visits: VisitTable, grid: GridSpec) -> dict[int, VisitationSpectrum]:
    """Bin visits into per-destination (ring, frequency) spectra.

    Every spectrum observes its full window: rings 1..R (R = the farthest
    ring with a visitor) by frequencies 1..30, with per-ring origin-cell
    occupancy clipped to the grid. Self visits cannot occur because visit
    records never point at their own home."""
    if len(visits) == 0:
        return {}
    dist = cell_distances_km(visits.home, visits.dest, grid)
    ring = rings_of(dist)
    order = np.lexsort((visits.f, ring, visits.dest))
    d_s, r_s, f_s = visits.dest[order], ring[order], visits.f[order]
    max_ring = int(r_s.max())
    offsets = ring_offset_table(grid, max_ring)

    spectra: dict[int, VisitationSpectrum] = {}
    dest_ids, starts = np.unique(d_s, return_index=True)
    bounds = np.append(starts, len(d_s))
    for k, dest in enumerate(dest_ids):
        r_blk = r_s[bounds[k]: bounds[k + 1]]
        f_blk = f_s[bounds[k]: bounds[k + 1]]
        n_rings = int(r_blk.max())
        counts = np.bincount((r_blk - 1) * F_MAX + (f_blk - 1),
                             minlength=n_rings * F_MAX).reshape(n_rings, F_MAX)
        occupancy = ring_cell_counts(grid, int(dest), n_rings, offsets=offsets)[1:]
        spectra[int(dest)] = VisitationSpectrum(
            dest_cell=int(dest), counts=counts.astype(np.float64),
            ring_cells=occupancy.astype(np.float64))
    return spectra


@dataclass(frozen=True)
class Flow:
    """All visitors from one origin cell to one destination cell, split by
    frequency group."""

    origin_cell: int
    dest_cell: int
    group_counts: tuple[int, int, int, int]
    total_visitors: int

    def __post_init__(self) -> None:
        if self.origin_cell == self.dest_cell:
            raise ValueError(f"flow {self.origin_cell}->{self.dest_cell} is a self loop")
        if self.total_visitors != sum(self.group_counts) or self.total_visitors < 1:
            raise ValueError("total_visitors must equal the group sum and be >= 1")


@dataclass(eq=False)
class FlowTable:
    """Flows in canonical (dest, origin) order with a per-destination index."""

    origin: np.ndarray
    dest: np.ndarray
    group_counts: np.ndarray  # (n, 4)

    def __post_init__(self) -> None:
        self.origin = np.asarray(self.origin, dtype=np.int64)
        self.dest = np.asarray(self.dest, dtype=np.int64)
        self.group_counts = np.asarray(self.group_counts, dtype=np.int64)
        if self.group_counts.shape != (len(self.origin), 4):
            raise ValueError("group_counts must be (n, 4)")
        if len(self.dest) != len(self.origin):
            raise ValueError("flow columns must have equal length")

    @property
    def total(self) -> np.ndarray:
        return self.group_counts.sum(axis=1)

    def __len__(self) -> int:
        return len(self.origin)

    def __iter__(self) -> Iterator[Flow]:
        totals = self.total
        for i in range(len(self)):
            yield Flow(int(self.origin[i]), int(self.dest[i]),
                       tuple(int(c) for c in self.group_counts[i]), int(totals[i]))

    def flows_into(self, dest: int) -> np.ndarray:
        """Row indices of all flows ending at dest."""
        lo = int(np.searchsorted(self.dest, dest, side="left"))
        hi = int(np.searchsorted(self.dest, dest, side="right"))
        return np.arange(lo, hi)

    @classmethod
    def empty(cls) -> "FlowTable":
        z = np.zeros(0, dtype=np.int64)
        return cls(z, z.copy(), np.zeros((0, 4), dtype=np.int64))


def build_flows(visits: VisitTable,
                freq_table: FrequencyGroupTable = DEFAULT_FREQ_TABLE) -> FlowTable:
    """Collapse visits into one flow per (origin, dest) pair with per-group
    visitor counts, sorted by (dest, origin)."""
    if len(visits) == 0:
        return FlowTable.empty()
    groups = freq_table.lookup()[visits.f]
    span = int(max(visits.home.max(), visits.dest.max())) + 1
    key = visits.dest * span + visits.home
    uniq, inverse = np.unique(key, return_inverse=True)
    counts = np.zeros((uniq.size, 4), dtype=np.int64)
    np.add.at(counts, (inverse, groups - 1), 1)
    return FlowTable(origin=uniq % span, dest=uniq // span, group_counts=counts)
