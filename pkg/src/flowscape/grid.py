"""Square-grid arithmetic over pre-projected planar coordinates.

Cells are half-open squares indexed row-major. A boundary point belongs to
the higher-indexed cell, so every in-bounds point owns exactly one cell.
Distances are Euclidean center-to-center and reported in kilometers;
distance rings are 1 km wide with round-half-up binning.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, OutOfGrid, SelfVisit


@dataclass(frozen=True)
class GridSpec:
    origin_x_m: float = 0.0
    origin_y_m: float = 0.0
    cell_size_m: float = 1000.0
    n_cols: int = 1
    n_rows: int = 1

    def __post_init__(self) -> None:
        if self.cell_size_m <= 0:
            raise ConfigError(f"cell_size_m must be positive, got {self.cell_size_m}")
        if self.n_cols < 1 or self.n_rows < 1:
            raise ConfigError(f"grid needs at least one cell, got {self.n_cols}x{self.n_rows}")

    @property
    def n_cells(self) -> int:
        return self.n_cols * self.n_rows

    def check_cell(self, cell: int) -> int:
        if not 0 <= cell < self.n_cells:
            raise OutOfGrid(f"cell id {cell} outside [0, {self.n_cells})")
        return cell

    def cell_id(self, row: int, col: int) -> int:
        return row * self.n_cols + col

    def row_col(self, cell: int) -> tuple[int, int]:
        self.check_cell(cell)
        return divmod(cell, self.n_cols)

    def center_m(self, cell: int) -> tuple[float, float]:
        row, col = self.row_col(cell)
        s = self.cell_size_m
        return (self.origin_x_m + (col + 0.5) * s, self.origin_y_m + (row + 0.5) * s)

    def centers_m(self, cells: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Vectorized cell centers; no bounds check."""
        rows, cols = np.divmod(np.asarray(cells, dtype=np.int64), self.n_cols)
        s = self.cell_size_m
        return (self.origin_x_m + (cols + 0.5) * s, self.origin_y_m + (rows + 0.5) * s)


def cell_of(x_m: float, y_m: float, grid: GridSpec) -> int:
    """Cell id owning the point, half-open on the upper edges."""
    col = math.floor((x_m - grid.origin_x_m) / grid.cell_size_m)
    row = math.floor((y_m - grid.origin_y_m) / grid.cell_size_m)
    if not (0 <= col < grid.n_cols and 0 <= row < grid.n_rows):
        raise OutOfGrid(f"point ({x_m}, {y_m}) outside grid bounding box")
    return grid.cell_id(row, col)


def cells_of(xs: np.ndarray, ys: np.ndarray, grid: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized cell_of. Returns (cell ids, in-bounds mask); out-of-bounds
    entries get id -1 and the caller decides whether that is an error."""
    cols = np.floor((np.asarray(xs, dtype=np.float64) - grid.origin_x_m) / grid.cell_size_m).astype(np.int64)
    rows = np.floor((np.asarray(ys, dtype=np.float64) - grid.origin_y_m) / grid.cell_size_m).astype(np.int64)
    ok = (cols >= 0) & (cols < grid.n_cols) & (rows >= 0) & (rows < grid.n_rows)
    ids = np.where(ok, rows * grid.n_cols + cols, -1)
    return ids, ok


def cell_distance_km(a: int, b: int, grid: GridSpec) -> float:
    """Euclidean center-to-center distance in km; symmetric."""
    ra, ca = grid.row_col(a)
    rb, cb = grid.row_col(b)
    return math.hypot(rb - ra, cb - ca) * grid.cell_size_m / 1000.0


def cell_distances_km(a: np.ndarray, b: np.ndarray, grid: GridSpec) -> np.ndarray:
    ra, ca = np.divmod(np.asarray(a, dtype=np.int64), grid.n_cols)
    rb, cb = np.divmod(np.asarray(b, dtype=np.int64), grid.n_cols)
    return np.hypot(rb - ra, cb - ca) * (grid.cell_size_m / 1000.0)


def ring_of(dist_km: float) -> int:
    """1 km distance ring index: max(1, round-half-up(dist)).

    The self cell (distance 0) has no ring; callers must exclude it."""
    if dist_km == 0:
        raise SelfVisit("distance 0 has no ring; self visits are excluded")
    if dist_km < 0:
        raise ValueError(f"distance must be positive, got {dist_km}")
    return max(1, math.floor(dist_km + 0.5))


def rings_of(dist_km: np.ndarray) -> np.ndarray:
    """Vectorized ring_of; caller guarantees strictly positive distances."""
    return np.maximum(1, np.floor(np.asarray(dist_km) + 0.5)).astype(np.int64)


def ring_offset_table(grid: GridSpec, max_ring: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All (drow, dcol) cell offsets whose ring index is in 1..max_ring.

    Returns (drow, dcol, ring) sorted by (drow, dcol), which keeps origin
    cell ids ascending for any fixed destination. The (0, 0) self offset is
    excluded. Shared by the sampler and the spectrum builder so both sides
    agree on ring membership."""
    if max_ring < 1:
        raise ValueError(f"max_ring must be >= 1, got {max_ring}")
    s_km = grid.cell_size_m / 1000.0
    lim = math.ceil((max_ring + 0.5) / s_km)
    span = np.arange(-lim, lim + 1, dtype=np.int64)
    drow, dcol = np.meshgrid(span, span, indexing="ij")
    drow, dcol = drow.ravel(), dcol.ravel()
    dist = np.hypot(drow, dcol) * s_km
    keep = dist > 0
    ring = np.zeros_like(drow)
    ring[keep] = rings_of(dist[keep])
    keep &= ring <= max_ring
    return drow[keep], dcol[keep], ring[keep]


def ring_cell_counts(grid: GridSpec, dest: int, max_ring: int,
                     offsets: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None) -> np.ndarray:
    """Number of in-grid cells per ring 1..max_ring around a destination.

    Index 0 of the returned array is unused (always 0); rings clipped by the
    grid boundary count only the cells that exist."""
    grid.check_cell(dest)
    drow, dcol, ring = offsets if offsets is not None else ring_offset_table(grid, max_ring)
    row, col = divmod(dest, grid.n_cols)
    ok = ((row + drow >= 0) & (row + drow < grid.n_rows)
          & (col + dcol >= 0) & (col + dcol < grid.n_cols))
    return np.bincount(ring[ok], minlength=max_ring + 1)[: max_ring + 1]
