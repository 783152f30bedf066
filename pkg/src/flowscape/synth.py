"""Synthetic worlds, law-direct visitor sampling, and visitor playback.

The sampler draws visitor counts straight from the inverse-square law, so
every downstream fit has an exact ground truth to recover. Randomness is
counter-based: each destination (and each playback agent) owns a Philox
stream keyed by the seed, which makes output independent of how the work
is partitioned across workers.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import ConfigError, SampleTooLarge
from .grid import GridSpec, ring_offset_table
from .law import F_MAX

_NS_SAMPLER = 1
_NS_PLAYBACK_SAMPLE = 2
_NS_PLAYBACK_STEP = 3
_NS_DISC_SCATTER = 4

# Destinations whose total expected draw mass is below this are skipped
# outright; the chance of losing even one visitor over a full run is < 1e-6.
MU_FLOOR = 1e-12


@dataclass(frozen=True)
class TownSpec:
    cell: int
    peak_mu: float
    radius_km: float

    def __post_init__(self) -> None:
        if self.peak_mu < 0:
            raise ConfigError(f"town peak_mu must be non-negative, got {self.peak_mu}")
        if self.radius_km <= 0:
            raise ConfigError(f"town radius_km must be positive, got {self.radius_km}")


@dataclass(eq=False)
class SyntheticWorld:
    grid: GridSpec
    mu_map: np.ndarray  # (n_cells,) ground-truth attractiveness
    towns: tuple[TownSpec, ...]
    seed: int = 0

    def __post_init__(self) -> None:
        self.mu_map = np.asarray(self.mu_map, dtype=np.float64)
        if self.mu_map.shape != (self.grid.n_cells,):
            raise ConfigError(f"mu_map must have {self.grid.n_cells} entries")
        if np.any(self.mu_map < 0):
            raise ConfigError("mu_map must be non-negative")


def build_world(grid: GridSpec, towns: list[TownSpec] | tuple[TownSpec, ...], seed: int = 0) -> SyntheticWorld:
    """Gaussian-kernel attractiveness surface: mu = sum of
    peak * exp(-d^2 / (2 radius^2)) over towns, d in km to the town center."""
    if not towns:
        raise ConfigError("need at least one town center")
    for t in towns:
        grid.check_cell(t.cell)
    cells = np.arange(grid.n_cells, dtype=np.int64)
    cx, cy = grid.centers_m(cells)
    mu = np.zeros(grid.n_cells)
    for t in towns:
        tx, ty = grid.center_m(t.cell)
        d_km = np.hypot(cx - tx, cy - ty) / 1000.0
        mu += t.peak_mu * np.exp(-(d_km**2) / (2.0 * t.radius_km**2))
    return SyntheticWorld(grid=grid, mu_map=mu, towns=tuple(towns), seed=seed)


@dataclass(frozen=True)
class UserVisit:
    """One user's month of visits to one destination: f distinct days."""

    user_id: str
    home_cell: int
    dest_cell: int
    f: int

    def __post_init__(self) -> None:
        if self.dest_cell == self.home_cell:
            raise ValueError(f"user {self.user_id}: destination equals home")
        if not 1 <= self.f <= F_MAX:
            raise ValueError(f"user {self.user_id}: frequency {self.f} outside 1..{F_MAX}")


@dataclass(eq=False)
class VisitTable:
    """Columnar store of UserVisit records; iterates as UserVisit objects.

    user_code is a dense 0-based id; user_labels maps codes back to external
    ids when the table came from a file (None means synthetic "u{code}")."""

    home: np.ndarray
    dest: np.ndarray
    f: np.ndarray
    user_code: np.ndarray
    user_labels: list[str] | None = None

    def __post_init__(self) -> None:
        self.home = np.asarray(self.home, dtype=np.int64)
        self.dest = np.asarray(self.dest, dtype=np.int64)
        self.f = np.asarray(self.f, dtype=np.int64)
        self.user_code = np.asarray(self.user_code, dtype=np.int64)
        n = len(self.home)
        if not (len(self.dest) == len(self.f) == len(self.user_code) == n):
            raise ValueError("visit columns must have equal length")
        if n:
            if np.any(self.dest == self.home):
                raise ValueError("self visits are not allowed")
            if np.any((self.f < 1) | (self.f > F_MAX)):
                raise ValueError(f"frequencies must lie in 1..{F_MAX}")

    def __len__(self) -> int:
        return len(self.home)

    def user_label(self, code: int) -> str:
        if self.user_labels is not None:
            return self.user_labels[code]
        return f"u{code}"

    def __iter__(self) -> Iterator[UserVisit]:
        for i in range(len(self)):
            yield UserVisit(self.user_label(int(self.user_code[i])),
                            int(self.home[i]), int(self.dest[i]), int(self.f[i]))

    @classmethod
    def empty(cls) -> "VisitTable":
        z = np.zeros(0, dtype=np.int64)
        return cls(z, z.copy(), z.copy(), z.copy())

    @classmethod
    def from_records(cls, records: list[UserVisit]) -> "VisitTable":
        codes: dict[str, int] = {}
        labels: list[str] = []
        ucol = np.zeros(len(records), dtype=np.int64)
        for i, r in enumerate(records):
            if r.user_id not in codes:
                codes[r.user_id] = len(labels)
                labels.append(r.user_id)
            ucol[i] = codes[r.user_id]
        return cls(np.array([r.home_cell for r in records], dtype=np.int64),
                   np.array([r.dest_cell for r in records], dtype=np.int64),
                   np.array([r.f for r in records], dtype=np.int64),
                   ucol, labels)


def _dest_stream(seed: int, dest: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence((seed, _NS_SAMPLER, dest))))


def _sample_columns(world: SyntheticWorld, r_max_km: float, f_max: int, seed: int,
                    dest_cells: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Visitor columns (home, dest, f) for the given destinations, in
    canonical (dest, origin, f) order. User ids are assigned by the caller
    after all partitions are merged."""
    grid = world.grid
    max_ring = int(r_max_km)
    drow, dcol, ring = ring_offset_table(grid, max_ring)
    fs = np.arange(1, f_max + 1, dtype=np.float64)
    inv_rf2 = 1.0 / (ring[:, None].astype(np.float64) * fs[None, :]) ** 2

    if dest_cells is None:
        dest_cells = np.arange(grid.n_cells, dtype=np.int64)
    homes: list[np.ndarray] = []
    dests: list[np.ndarray] = []
    freqs: list[np.ndarray] = []
    for d in dest_cells:
        mu_d = world.mu_map[d]
        if mu_d <= MU_FLOOR:
            continue
        row, col = divmod(int(d), grid.n_cols)
        orow = row + drow
        ocol = col + dcol
        ok = (orow >= 0) & (orow < grid.n_rows) & (ocol >= 0) & (ocol < grid.n_cols)
        origin_ids = orow[ok] * grid.n_cols + ocol[ok]
        lam = mu_d * inv_rf2[ok]
        counts = _dest_stream(seed, int(d)).poisson(lam)
        oi, fi = np.nonzero(counts)
        if oi.size == 0:
            continue
        reps = counts[oi, fi]
        homes.append(np.repeat(origin_ids[oi], reps))
        freqs.append(np.repeat(fi + 1, reps))
        dests.append(np.full(int(reps.sum()), d, dtype=np.int64))
    if not homes:
        z = np.zeros(0, dtype=np.int64)
        return z, z.copy(), z.copy()
    return (np.concatenate(homes), np.concatenate(dests), np.concatenate(freqs))


def sample_visits(world: SyntheticWorld, r_max_km: float, *, f_max: int = F_MAX,
                  seed: int = 0) -> VisitTable:
    """Draw one month of visitors from the law.

    For every destination d, origin cell o at ring 1..r_max, and frequency
    f in 1..f_max, the visitor count is Poisson(mu_d / (ring * f)^2); each
    sampled visitor is a fresh user whose home is o. Output order and user
    ids are canonical in (dest, origin, f)."""
    if r_max_km < 1:
        raise ConfigError(f"r_max_km must be >= 1, got {r_max_km}")
    if not 1 <= f_max <= F_MAX:
        raise ConfigError(f"f_max must lie in 1..{F_MAX}, got {f_max}")
    home, dest, f = _sample_columns(world, r_max_km, f_max, seed)
    return VisitTable(home, dest, f, np.arange(len(home), dtype=np.int64))


@dataclass(frozen=True)
class PlaybackAgent:
    """A sampled visitor: home plus visited places weighted by observed f."""

    agent_id: str
    home_cell: int
    places: tuple[tuple[int, int], ...]  # (cell, weight)

    def __post_init__(self) -> None:
        if not self.places:
            raise ValueError(f"agent {self.agent_id} has no places")
        if any(w < 1 for _, w in self.places):
            raise ValueError(f"agent {self.agent_id} has a weight below 1")


@dataclass(frozen=True)
class TripEvent:
    step: int
    agent_id: str
    dest_cell: int


def playback_init(visits: VisitTable, sample_size: int, seed: int = 0) -> list[PlaybackAgent]:
    """Uniformly sample users (without replacement) into playback agents."""
    users = np.unique(visits.user_code)
    if sample_size > users.size:
        raise SampleTooLarge(f"asked for {sample_size} agents from {users.size} users")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence((seed, _NS_PLAYBACK_SAMPLE))))
    chosen = np.sort(rng.choice(users, size=sample_size, replace=False))
    agents = []
    order = np.lexsort((visits.dest, visits.user_code))
    uc, dc, hc, fc = (visits.user_code[order], visits.dest[order],
                      visits.home[order], visits.f[order])
    starts = np.searchsorted(uc, chosen, side="left")
    ends = np.searchsorted(uc, chosen, side="right")
    for code, a, b in zip(chosen, starts, ends):
        places = tuple((int(dc[i]), int(fc[i])) for i in range(a, b))
        agents.append(PlaybackAgent(agent_id=visits.user_label(int(code)),
                                    home_cell=int(hc[a]), places=places))
    return agents


def agent_stream(agent: PlaybackAgent, seed: int) -> np.random.Generator:
    """Per-agent Philox stream; consuming one draw per step makes the step
    index the stream counter."""
    h = int.from_bytes(hashlib.sha256(agent.agent_id.encode()).digest()[:8], "little")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence((seed, _NS_PLAYBACK_STEP, h))))


def playback_step(agent: PlaybackAgent, rng: np.random.Generator, step: int = 0) -> TripEvent:
    """One home -> place -> home trip; the destination is drawn with
    probability proportional to its observed visit frequency."""
    weights = np.array([w for _, w in agent.places], dtype=np.float64)
    cum = np.cumsum(weights)
    idx = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
    return TripEvent(step=step, agent_id=agent.agent_id, dest_cell=agent.places[idx][0])
