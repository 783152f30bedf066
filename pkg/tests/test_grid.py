import math

import numpy as np
import pytest

from flowscape.errors import ConfigError, OutOfGrid, SelfVisit
from flowscape.grid import (GridSpec, cell_distance_km, cell_distances_km, cell_of,
                            cells_of, ring_cell_counts, ring_of, ring_offset_table,
                            rings_of)


class TestCellOf:
    def test_interior_point(self, grid10):
        assert cell_of(500.0, 500.0, grid10) == 0

    def test_half_open_boundary_goes_to_higher_cell(self, grid10):
        assert cell_of(1000.0, 0.0, grid10) == 1

    def test_outside_box_raises(self, grid10):
        with pytest.raises(OutOfGrid):
            cell_of(-1.0, 0.0, grid10)

    def test_upper_edge_is_outside(self, grid10):
        with pytest.raises(OutOfGrid):
            cell_of(10_000.0, 500.0, grid10)

    def test_row_major_ids(self, grid10):
        assert cell_of(500.0, 1500.0, grid10) == 10

    def test_nonzero_origin(self):
        g = GridSpec(origin_x_m=-5000.0, origin_y_m=2000.0, n_cols=4, n_rows=4)
        assert cell_of(-4999.0, 2001.0, g) == 0

    def test_vectorized_matches_scalar(self, grid10):
        xs = np.array([500.0, 1000.0, 9999.0])
        ys = np.array([500.0, 0.0, 9999.0])
        ids, ok = cells_of(xs, ys, grid10)
        assert ok.all()
        assert list(ids) == [cell_of(x, y, grid10) for x, y in zip(xs, ys)]

    def test_vectorized_flags_outside(self, grid10):
        ids, ok = cells_of(np.array([-1.0]), np.array([0.0]), grid10)
        assert not ok[0] and ids[0] == -1


class TestDistance:
    def test_identity(self, grid10):
        assert cell_distance_km(7, 7, grid10) == 0.0

    def test_adjacent(self, grid10):
        assert cell_distance_km(0, 1, grid10) == 1.0

    def test_diagonal(self, grid10):
        assert cell_distance_km(0, 11, grid10) == pytest.approx(math.sqrt(2), abs=1e-12)

    def test_symmetric(self, grid10):
        assert cell_distance_km(3, 97, grid10) == cell_distance_km(97, 3, grid10)

    def test_invalid_id(self, grid10):
        with pytest.raises(OutOfGrid):
            cell_distance_km(0, 100, grid10)

    def test_vectorized(self, grid10):
        a = np.array([0, 0, 3])
        b = np.array([1, 11, 97])
        expect = [cell_distance_km(int(x), int(y), grid10) for x, y in zip(a, b)]
        assert np.allclose(cell_distances_km(a, b, grid10), expect)


class TestRings:
    def test_clamps_to_first_ring(self):
        assert ring_of(0.7) == 1

    def test_round_half_up(self):
        assert ring_of(2.5) == 3

    def test_self_cell_excluded(self):
        with pytest.raises(SelfVisit):
            ring_of(0.0)

    def test_negative_distance(self):
        with pytest.raises(ValueError):
            ring_of(-1.0)

    def test_vectorized_agrees(self):
        d = np.array([0.3, 1.0, 1.49, 1.5, 2.5, 10.2])
        assert list(rings_of(d)) == [ring_of(float(x)) for x in d]

    def test_offset_table_ring_one_has_eight_neighbors(self, grid10):
        drow, dcol, ring = ring_offset_table(grid10, 1)
        assert (ring == 1).sum() == 8

    def test_offset_table_excludes_self(self, grid10):
        drow, dcol, _ = ring_offset_table(grid10, 3)
        assert not ((drow == 0) & (dcol == 0)).any()

    def test_offset_table_sorted_by_row_then_col(self, grid10):
        drow, dcol, _ = ring_offset_table(grid10, 4)
        keys = drow * 1000 + dcol
        assert (np.diff(keys) > 0).all()

    def test_occupancy_center_vs_corner(self):
        g = GridSpec(n_cols=21, n_rows=21)
        center = ring_cell_counts(g, g.cell_id(10, 10), 2)
        corner = ring_cell_counts(g, 0, 2)
        assert center[1] == 8 and corner[1] == 3
        assert center[2] == 12 and corner[2] == 4

    def test_occupancy_matches_brute_force(self):
        g = GridSpec(n_cols=15, n_rows=12)
        dest = g.cell_id(4, 9)
        got = ring_cell_counts(g, dest, 6)
        brute = np.zeros(7, dtype=int)
        for c in range(g.n_cells):
            if c == dest:
                continue
            r = ring_of(cell_distance_km(dest, c, g))
            if r <= 6:
                brute[r] += 1
        assert list(got) == list(brute)


class TestGridSpec:
    def test_rejects_bad_cell_size(self):
        with pytest.raises(ConfigError):
            GridSpec(cell_size_m=0)

    def test_rejects_empty_grid(self):
        with pytest.raises(ConfigError):
            GridSpec(n_cols=0, n_rows=5)

    def test_center(self, grid10):
        assert grid10.center_m(0) == (500.0, 500.0)
        assert grid10.center_m(11) == (1500.0, 1500.0)

    def test_centers_vectorized(self, grid10):
        xs, ys = grid10.centers_m(np.array([0, 11]))
        assert list(xs) == [500.0, 1500.0] and list(ys) == [500.0, 1500.0]
