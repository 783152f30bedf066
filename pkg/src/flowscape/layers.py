"""Threshold layers, cell info panels, disc snapshots, and frame export.

A layer preset decides which destinations and flows are worth drawing;
peeling from the loosest preset to the strictest reveals progressively
more attractive places. Panels and discs are the per-cell detail views.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Mapping

import numpy as np

from .errors import ConfigError, MissingStats
from .grid import GridSpec
from .ingest import FlowTable
from .law import DEFAULT_FREQ_TABLE, CellStats, FrequencyGroupTable
from .synth import (PlaybackAgent, TripEvent, VisitTable, _NS_DISC_SCATTER,
                    agent_stream, playback_step)


@dataclass(frozen=True)
class LayerPreset:
    """Destination and flow thresholds for one visible layer.

    A destination passes on its visitor count, its log10 attractiveness, or
    both, per dest_rule. A flow passes when its destination does, its
    visitors within group_mask total at least min_flow_visitors, and at
    least one masked group is non-empty."""

    name: str
    min_dest_visitors: float
    min_log10_mu: float
    dest_rule: str = "or"  # "or" | "and"
    group_mask: frozenset[int] = frozenset({1, 2, 3, 4})
    min_flow_visitors: int = 1

    def __post_init__(self) -> None:
        if self.dest_rule not in ("or", "and"):
            raise ConfigError(f"dest_rule must be 'or' or 'and', got {self.dest_rule!r}")
        if not self.group_mask or not self.group_mask <= {1, 2, 3, 4}:
            raise ConfigError(f"group_mask must be a non-empty subset of 1..4, got {self.group_mask}")

    def dest_passes(self, visitors: float, log10_mu: float) -> bool:
        by_visitors = visitors >= self.min_dest_visitors
        by_mu = log10_mu >= self.min_log10_mu
        return (by_visitors or by_mu) if self.dest_rule == "or" else (by_visitors and by_mu)


def preset_catalog() -> dict[str, LayerPreset]:
    """Built-in layers, loosest to strictest."""
    presets = [
        LayerPreset("intermediate50", 50, -math.inf, dest_rule="and"),
        LayerPreset("peak5000", 5000, 1.65),
        LayerPreset("peak5000-frequent", 5000, 1.65, group_mask=frozenset({4})),
        LayerPreset("peak10000", 10000, 1.65),
    ]
    return {p.name: p for p in presets}


def get_preset(name: str) -> LayerPreset:
    try:
        return preset_catalog()[name]
    except KeyError:
        raise ConfigError(f"unknown preset '{name}'; known: {sorted(preset_catalog())}") from None


def apply_preset(cells: Mapping[int, CellStats], flow_table: FlowTable,
                 preset: LayerPreset) -> tuple[np.ndarray, np.ndarray]:
    """Filter to (passing destination ids, passing flow row indices).

    Every destination referenced by the flow table must have stats."""
    dest_ids = np.unique(flow_table.dest)
    missing = [int(d) for d in dest_ids if int(d) not in cells]
    if missing:
        raise MissingStats(f"no stats for destination cells {missing[:5]}"
                           + ("..." if len(missing) > 5 else ""))
    passing = {int(d) for d in dest_ids
               if preset.dest_passes(cells[int(d)].visitors, cells[int(d)].log10_mu)}
    if len(flow_table) == 0:
        return np.array(sorted(passing), dtype=np.int64), np.zeros(0, dtype=np.int64)
    mask_cols = [g - 1 for g in sorted(preset.group_mask)]
    masked = flow_table.group_counts[:, mask_cols]
    flow_ok = (np.isin(flow_table.dest, np.array(sorted(passing), dtype=np.int64))
               & (masked.sum(axis=1) >= preset.min_flow_visitors)
               & (masked > 0).any(axis=1))
    return np.array(sorted(passing), dtype=np.int64), np.nonzero(flow_ok)[0]


def _fmt_count(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def _fmt_log10_mu(x: float) -> str:
    return str(Decimal(repr(float(x))).quantize(Decimal("0.001"), rounding=ROUND_HALF_UP))


def panel_text(stats: CellStats, name: str | None = None) -> str:
    """The two-line cell panel, byte-stable:

    No. {cell_id} {name}
    visitors: {visitors} visits: {visits} log10 mu: {log10_mu to 3 decimals}
    """
    head = f"No. {stats.cell_id}" + (f" {name}" if name else "")
    body = (f"visitors: {_fmt_count(stats.visitors)} visits: {_fmt_count(stats.visits)}"
            f" log10 μ: {_fmt_log10_mu(stats.log10_mu)}")
    return head + "\n" + body


@dataclass(eq=False)
class DiscSnapshot:
    """Radial scatter of one destination's visitors: radius is distance to
    the destination (normalized by the disc radius), color is frequency
    group, angle is the true azimuth toward each visitor's home."""

    dest_cell: int
    radius_km: float
    radial: np.ndarray
    angle: np.ndarray
    group: np.ndarray

    def __len__(self) -> int:
        return len(self.radial)

    def to_dict(self) -> dict:
        return {
            "dest_cell": self.dest_cell,
            "radius_km": self.radius_km,
            "dots": [{"radial": float(r), "angle": float(a), "group": int(g)}
                     for r, a, g in zip(self.radial, self.angle, self.group)],
        }


def disc_snapshot(dest_cell: int, visits: VisitTable, grid: GridSpec,
                  radius_km: float = 50.0, *,
                  freq_table: FrequencyGroupTable = DEFAULT_FREQ_TABLE,
                  scatter_seed: int | None = None) -> DiscSnapshot:
    """One dot per visitor whose home lies within radius_km of the
    destination; angle is measured from east, counter-clockwise. A scatter
    seed substitutes random angles for the true azimuths."""
    if radius_km <= 0:
        raise ConfigError(f"radius_km must be positive, got {radius_km}")
    grid.check_cell(dest_cell)
    sel = np.nonzero(visits.dest == dest_cell)[0]
    hx, hy = grid.centers_m(visits.home[sel])
    dx, dy = grid.center_m(dest_cell)
    dist_km = np.hypot(hx - dx, hy - dy) / 1000.0
    keep = dist_km <= radius_km
    sel = sel[keep]
    radial = dist_km[keep] / radius_km
    if scatter_seed is not None:
        rng = np.random.Generator(np.random.Philox(
            np.random.SeedSequence((scatter_seed, _NS_DISC_SCATTER, dest_cell))))
        angle = rng.uniform(0.0, 2.0 * math.pi, size=sel.size)
    else:
        angle = np.arctan2(hy[keep] - dy, hx[keep] - dx)
    group = freq_table.lookup()[visits.f[sel]]
    return DiscSnapshot(dest_cell=dest_cell, radius_km=float(radius_km),
                        radial=radial, angle=angle, group=group)


def export_frames(agents: list[PlaybackAgent], n_steps: int, seed: int = 0) -> list[TripEvent]:
    """One trip per agent per step, ordered by (step, agent_id).

    Each agent owns an independent seeded stream, so the event list is
    reproducible and does not depend on scheduling."""
    if not agents:
        raise ConfigError("no agents to play back")
    if n_steps < 1:
        raise ConfigError(f"n_steps must be >= 1, got {n_steps}")
    ordered = sorted(agents, key=lambda a: a.agent_id)
    streams = [agent_stream(a, seed) for a in ordered]
    events: list[TripEvent] = []
    for step in range(1, n_steps + 1):
        for agent, rng in zip(ordered, streams):
            events.append(playback_step(agent, rng, step))
    return events
