"""The inverse-square visitation law and everything fitted from it.

A destination's visitors, split by distance ring r and monthly frequency f,
follow N ~ mu / (r*f)^2 per origin cell, where mu is the destination's
attractiveness. This module holds the frequency grouping, the per-destination
visitation spectrum, the mu estimator, and the mountain-height mapping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import ConfigError, FrequencyOutOfRange, NoData

F_MIN = 1
F_MAX = 30

DEFAULT_GROUP_BOUNDARIES: tuple[tuple[int, int], ...] = ((1, 7), (8, 14), (15, 21), (22, 30))

# dark blue, light blue, coral, deep pink (RGBA 0..255)
GROUP_COLORS_RGBA: tuple[tuple[int, int, int, int], ...] = (
    (0, 0, 139, 255),
    (173, 216, 230, 255),
    (255, 127, 80, 255),
    (255, 20, 147, 255),
)


@dataclass(frozen=True)
class FrequencyGroupTable:
    """Four contiguous frequency bands over 1..30 visits/month.

    The top band is pinned to 22..30; the lower three are configurable.
    Group indices are 1-based, matching the color table."""

    boundaries: tuple[tuple[int, int], ...] = DEFAULT_GROUP_BOUNDARIES
    colors: tuple[tuple[int, int, int, int], ...] = GROUP_COLORS_RGBA

    def __post_init__(self) -> None:
        b = self.boundaries
        if len(b) != 4:
            raise ConfigError(f"expected 4 frequency groups, got {len(b)}")
        if b[0][0] != F_MIN or b[-1][1] != F_MAX:
            raise ConfigError(f"groups must cover exactly {F_MIN}..{F_MAX}")
        for (lo, hi), (nlo, _) in zip(b, b[1:]):
            if hi < lo or nlo != hi + 1:
                raise ConfigError(f"group boundaries must be ascending and contiguous: {b}")
        if b[3] != (22, 30):
            raise ConfigError(f"the top group is fixed at 22..30, got {b[3]}")
        if len(self.colors) != 4 or any(len(c) != 4 for c in self.colors):
            raise ConfigError("need exactly 4 RGBA colors")

    def group_of(self, f: int) -> int:
        if not (F_MIN <= f <= F_MAX) or int(f) != f:
            raise FrequencyOutOfRange(f"frequency {f} outside {F_MIN}..{F_MAX}")
        for g, (lo, hi) in enumerate(self.boundaries, start=1):
            if lo <= f <= hi:
                return g
        raise FrequencyOutOfRange(f"frequency {f} not covered by {self.boundaries}")

    def lookup(self) -> np.ndarray:
        """Group index per frequency, shape (F_MAX + 1,); index 0 unused."""
        table = np.zeros(F_MAX + 1, dtype=np.int64)
        for g, (lo, hi) in enumerate(self.boundaries, start=1):
            table[lo: hi + 1] = g
        return table


DEFAULT_FREQ_TABLE = FrequencyGroupTable()


def freq_group(f: int, table: FrequencyGroupTable = DEFAULT_FREQ_TABLE) -> int:
    return table.group_of(f)


def expected_visitors(mu: float, r_km: float, f: float) -> float:
    """Expected unique visitors per 1 km^2 origin cell: mu / (r*f)^2."""
    if mu < 0:
        raise ValueError(f"mu must be non-negative, got {mu}")
    if r_km < 1:
        raise ValueError(f"r_km below the first ring, got {r_km}")
    if f < 1:
        raise ValueError(f"frequency must be >= 1, got {f}")
    return mu / (r_km * f) ** 2


@dataclass(eq=False)
class VisitationSpectrum:
    """Unique-visitor counts for one destination, binned by (ring, frequency).

    counts[r-1][f-1] holds the visitors from ring r with frequency f; the
    self cell (ring 0) is never present. ring_cells[r-1] records how many
    origin cells the ring actually contains (clipped at grid edges), so the
    per-cell law density can be recovered from ring totals. observed marks
    which bins were genuinely measured: a zero count in an observed bin is
    evidence, an unobserved bin says nothing. Spectra built from grid data
    observe every bin in their (ring, frequency) window; spectra built from
    explicit bin dicts observe exactly those bins.
    """

    dest_cell: int
    counts: np.ndarray
    ring_cells: np.ndarray | None = None
    observed: np.ndarray | None = None

    def __post_init__(self) -> None:
        self.counts = np.asarray(self.counts, dtype=np.float64)
        if self.counts.ndim != 2 or self.counts.shape[0] < 1 or self.counts.shape[1] < 1:
            raise ValueError(f"counts must be a (rings, freqs) matrix, got {self.counts.shape}")
        if np.any(self.counts < 0):
            raise ValueError("negative visitor count")
        if self.ring_cells is None:
            self.ring_cells = np.ones(self.counts.shape[0], dtype=np.float64)
        else:
            self.ring_cells = np.asarray(self.ring_cells, dtype=np.float64)
        if self.ring_cells.shape != (self.counts.shape[0],):
            raise ValueError("ring_cells must have one entry per ring")
        if self.observed is None:
            self.observed = np.ones(self.counts.shape, dtype=bool)
        else:
            self.observed = np.asarray(self.observed, dtype=bool)
        if self.observed.shape != self.counts.shape:
            raise ValueError("observed mask must match the counts shape")
        if np.any(self.counts[~self.observed] != 0):
            raise ValueError("unobserved bins must have zero counts")

    @classmethod
    def from_bins(cls, dest_cell: int, bins: Mapping[tuple[int, int], float],
                  ring_cells: Mapping[int, float] | None = None) -> "VisitationSpectrum":
        """Build a spectrum observing exactly the given (ring, f) bins."""
        if not bins:
            raise NoData(f"destination {dest_cell} has no bins")
        max_r = max(r for r, _ in bins)
        max_f = max(f for _, f in bins)
        for r, f in bins:
            if r < 1 or f < 1:
                raise ValueError(f"bin ({r}, {f}) below (1, 1); ring 0 is never present")
        counts = np.zeros((max_r, max_f))
        observed = np.zeros((max_r, max_f), dtype=bool)
        for (r, f), n in bins.items():
            counts[r - 1, f - 1] = n
            observed[r - 1, f - 1] = True
        cells = np.ones(max_r)
        if ring_cells:
            for r, c in ring_cells.items():
                cells[r - 1] = c
        return cls(dest_cell, counts, cells, observed)

    @property
    def n_rings(self) -> int:
        return self.counts.shape[0]

    @property
    def n_freqs(self) -> int:
        return self.counts.shape[1]

    def visitor_total(self) -> float:
        return float(self.counts.sum())

    def visit_total(self) -> float:
        fs = np.arange(1, self.n_freqs + 1, dtype=np.float64)
        return float((self.counts * fs[None, :]).sum())


@dataclass(frozen=True)
class MuFit:
    """Fitted attractiveness plus diagnostics.

    slope_diag is the ordinary least-squares slope of log ring-density
    against log(r*f); it should sit near -2 when the data follow the law,
    and is None when fewer than two distinct r*f values carry visitors."""

    mu_hat: float
    slope_diag: float | None
    n_bins: int


def estimate_mu(spectrum: VisitationSpectrum) -> MuFit:
    """Invert the inverse-square law over a spectrum's observed bins.

    mu_hat is the ratio of total observed visitors to the law's total
    per-unit-mu expectation sum(ring_cells / (r*f)^2), the maximum-likelihood
    estimate under Poisson bin counts. Zero counts in observed bins push the
    estimate down, which is exactly why the observed mask matters."""
    counts, observed = spectrum.counts, spectrum.observed
    rs = np.arange(1, spectrum.n_rings + 1, dtype=np.float64)
    fs = np.arange(1, spectrum.n_freqs + 1, dtype=np.float64)
    rf = np.outer(rs, fs)
    weight_per_mu = np.where(observed, spectrum.ring_cells[:, None] / rf**2, 0.0)
    total = counts.sum()
    if not observed.any() or total <= 0:
        raise NoData(f"destination {spectrum.dest_cell} has no non-empty bins")
    mu_hat = float(total / weight_per_mu.sum())

    nz = counts > 0
    x = np.log(rf[nz])
    slope: float | None = None
    if np.unique(x).size >= 2:
        y = np.log(counts[nz] / np.broadcast_to(spectrum.ring_cells[:, None], counts.shape)[nz])
        xc = x - x.mean()
        slope = float((xc * (y - y.mean())).sum() / (xc * xc).sum())
    return MuFit(mu_hat=mu_hat, slope_diag=slope, n_bins=int(nz.sum()))


@dataclass(frozen=True)
class HeightParams:
    """Mountain height mapping: scale_m * (log10 mu) ** exponent for mu > 1."""

    exponent: float = 2.0
    scale_m: float = 1000.0

    def __post_init__(self) -> None:
        if self.exponent <= 0 or self.scale_m <= 0:
            raise ConfigError(f"height exponent and scale must be positive, got {self}")


def mountain_height(mu: float, params: HeightParams = HeightParams()) -> float:
    """Peak height in meters; clamps to 0 for mu <= 1 (non-positive log10 mu)."""
    if mu < 0:
        raise ValueError(f"mu must be non-negative, got {mu}")
    if mu <= 1:
        return 0.0
    return params.scale_m * math.log10(mu) ** params.exponent


@dataclass(frozen=True)
class CellStats:
    cell_id: int
    visitors: float
    visits: float
    mu: float
    log10_mu: float
    height_m: float

    def __post_init__(self) -> None:
        if self.visitors > 0 and self.visits < self.visitors:
            raise ValueError(f"cell {self.cell_id}: visits {self.visits} < visitors {self.visitors}")
        if self.mu <= 1 and self.height_m != 0:
            raise ValueError(f"cell {self.cell_id}: height must be 0 for mu <= 1")


def _as_count(x: float) -> float:
    """Integer counts stay integers; law-exact real-valued fixtures stay real."""
    return int(x) if float(x).is_integer() else float(x)


def cell_stats(spectrum: VisitationSpectrum,
               height_params: HeightParams = HeightParams()) -> CellStats:
    """Visitors, visits, fitted mu, and mountain height for one destination."""
    fit = estimate_mu(spectrum)
    return CellStats(
        cell_id=spectrum.dest_cell,
        visitors=_as_count(spectrum.visitor_total()),
        visits=_as_count(spectrum.visit_total()),
        mu=fit.mu_hat,
        log10_mu=math.log10(fit.mu_hat),
        height_m=mountain_height(fit.mu_hat, height_params),
    )
