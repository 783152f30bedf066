import numpy as np
import pytest

from flowscape.errors import DegenerateFlow, MissingStats
from flowscape.geometry import (CurveControl, FLOW_DTYPE, VERTEX_DTYPE, WidthParams,
                                arc_table, compile_bundle, control_points,
                                eval_cubic, flow_width, subdivide, tessellate)
from flowscape.grid import GridSpec
from flowscape.ingest import Flow, FlowTable
from flowscape.law import CellStats
from flowscape.layers import LayerPreset


def _stats(cell: int, visitors: int = 9000, log10_mu: float = 2.0,
           height: float = 4000.0) -> CellStats:
    return CellStats(cell_id=cell, visitors=visitors, visits=visitors * 2,
                     mu=10**log10_mu, log10_mu=log10_mu, height_m=height)


OPEN_PRESET = LayerPreset("open", 0, -np.inf)


class TestControlPoints:
    def test_thirds_rule(self):
        cp = control_points((0.0, 0.0), (3000.0, 0.0), 6.0)
        assert cp.p0 == (0.0, 0.0, 0.0)
        assert cp.p1 == (1000.0, 0.0, 0.0)
        assert cp.p2 == (2000.0, 0.0, 6.0)
        assert cp.p3 == (3000.0, 0.0, 6.0)

    def test_flat_flow(self):
        cp = control_points((0.0, 0.0), (1000.0, 500.0), 0.0)
        assert cp.p2[2] == 0.0 and cp.p3[2] == 0.0

    def test_degenerate(self):
        with pytest.raises(DegenerateFlow):
            control_points((10.0, 10.0), (10.0, 10.0), 5.0)

    def test_plan_view_is_linear_in_t(self):
        # collinear thirds make x(t) = o + (d - o) t exactly
        cp = control_points((100.0, -200.0), (4100.0, 1800.0), 77.0)
        t = np.linspace(0, 1, 23)
        pts = eval_cubic(cp, t)
        assert np.allclose(pts[:, 0], 100.0 + 4000.0 * t, atol=1e-9)
        assert np.allclose(pts[:, 1], -200.0 + 2000.0 * t, atol=1e-9)


class TestEvalCubic:
    CP = CurveControl((0, 0, 0), (1, 0, 0), (2, 0, 6), (3, 0, 6))

    def test_endpoints(self):
        assert list(eval_cubic(self.CP, 0.0)) == [0.0, 0.0, 0.0]
        assert list(eval_cubic(self.CP, 1.0)) == [3.0, 0.0, 6.0]

    def test_midpoint_hand_value(self):
        # (P0 + 3 P1 + 3 P2 + P3) / 8
        assert list(eval_cubic(self.CP, 0.5)) == [1.5, 0.0, 3.0]

    def test_z_profile_closed_form(self):
        h = 6.0
        t = np.linspace(0, 1, 101)
        z = eval_cubic(self.CP, t)[:, 2]
        assert np.allclose(z, h * t**2 * (3 - 2 * t), atol=1e-12)
        assert z[50] == pytest.approx(h / 2)

    def test_rejects_outside_range(self):
        with pytest.raises(ValueError):
            eval_cubic(self.CP, 1.5)


class TestArcTable:
    def test_flat_straight_is_linear(self):
        cp = control_points((0.0, 0.0), (3000.0, 0.0), 0.0)
        table = arc_table(cp, 64)
        assert table[0] == 0.0
        assert np.allclose(table, np.linspace(0, 3000, 65), atol=1e-6)

    def test_one_km_flat(self):
        cp = control_points((0.0, 0.0), (1000.0, 0.0), 0.0)
        assert arc_table(cp, 64)[-1] == pytest.approx(1000.0)

    def test_total_at_least_chord(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            o = rng.uniform(-1e4, 1e4, 2)
            d = rng.uniform(-1e4, 1e4, 2)
            if np.allclose(o, d):
                continue
            h = float(rng.uniform(0, 5000))
            cp = control_points(tuple(o), tuple(d), h)
            chord = float(np.hypot(*(d - o)))
            straight = float(np.hypot(chord, h))
            assert arc_table(cp, 64)[-1] >= straight - 1e-6

    def test_monotone(self):
        cp = control_points((0.0, 0.0), (2000.0, 1000.0), 3000.0)
        assert (np.diff(arc_table(cp, 32)) > 0).all()

    def test_needs_two_samples(self):
        cp = control_points((0.0, 0.0), (1.0, 0.0), 0.0)
        with pytest.raises(ValueError):
            arc_table(cp, 1)


class TestSubdivide:
    TABLE = np.linspace(0.0, 1000.0, 65)  # straight flat curve

    def test_single_group(self):
        seg = subdivide(Flow(0, 1, (0, 7, 0, 0), 7), self.TABLE)
        assert seg.segments == ((0.0, 1.0, 2),)

    def test_equal_quarters(self):
        seg = subdivide(Flow(0, 1, (10, 10, 10, 10), 40), self.TABLE)
        assert [g for _, _, g in seg.segments] == [1, 2, 3, 4]
        for (t0, t1, _), want in zip(seg.segments, (0.25, 0.5, 0.75, 1.0)):
            assert t1 == pytest.approx(want)

    def test_shares_match_counts(self):
        seg = subdivide(Flow(0, 1, (5, 0, 3, 2), 10), self.TABLE)
        assert [g for _, _, g in seg.segments] == [1, 3, 4]
        spans = [t1 - t0 for t0, t1, _ in seg.segments]
        assert spans == pytest.approx([0.5, 0.3, 0.2])
        # contiguous cover of [0, 1]
        assert seg.segments[0][0] == 0.0 and seg.segments[-1][1] == 1.0
        for (_, a, _), (b, _, _) in zip(seg.segments, seg.segments[1:]):
            assert a == b

    def test_arc_shares_on_curved_table(self):
        cp = control_points((0.0, 0.0), (3000.0, 0.0), 2500.0)
        table = arc_table(cp, 64)
        flow = Flow(0, 1, (2, 2, 0, 4), 8)
        seg = subdivide(flow, table)
        t_grid = np.linspace(0, 1, 65)
        for t0, t1, g in seg.segments:
            s0 = float(np.interp(t0, t_grid, table))
            s1 = float(np.interp(t1, t_grid, table))
            share = flow.group_counts[g - 1] / flow.total_visitors
            assert (s1 - s0) / table[-1] == pytest.approx(share, abs=1e-12)


class TestFlowWidth:
    def test_unit_total(self):
        assert flow_width(1) == 10.0

    def test_power_scaling(self):
        assert flow_width(100) == pytest.approx(100.0)

    def test_minimum_clamp(self):
        assert flow_width(1, WidthParams(base_m=0.5, exponent=0.5, min_m=2.0)) == 2.0

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            flow_width(0)


class TestTessellate:
    GRID = GridSpec(n_cols=10, n_rows=10)

    def test_m2_is_exactly_the_endpoints(self):
        cells = {1: _stats(1, height=4000.0)}
        run = tessellate(Flow(0, 1, (1, 0, 0, 0), 1), cells, self.GRID, n_vertices=2)
        assert run.xyz[0, 2] == 0.0
        assert run.xyz[1, 2] == 4000.0
        assert list(run.xyz[0, :2]) == [500.0, 500.0]
        assert list(run.xyz[1, :2]) == [1500.0, 500.0]

    def test_single_group_owns_everything(self):
        cells = {5: _stats(5)}
        run = tessellate(Flow(0, 5, (0, 0, 4, 0), 4), cells, self.GRID)
        assert (run.group == 3).all()

    def test_equal_split_16_16(self):
        cells = {9: _stats(9)}
        run = tessellate(Flow(0, 9, (1, 0, 0, 1), 2), cells, self.GRID, n_vertices=32)
        assert (run.group[:16] == 1).all()
        assert (run.group[16:] == 4).all()

    def test_missing_stats(self):
        with pytest.raises(MissingStats):
            tessellate(Flow(0, 5, (1, 0, 0, 0), 1), {}, self.GRID)

    def test_small_share_still_owns_a_vertex(self):
        cells = {3: _stats(3)}
        run = tessellate(Flow(0, 3, (31, 0, 0, 1), 32), cells, self.GRID, n_vertices=32)
        assert (run.group == 4).sum() == 1

    def test_width_constant_along_run(self):
        cells = {3: _stats(3)}
        run = tessellate(Flow(0, 3, (100, 0, 0, 0), 100), cells, self.GRID)
        assert run.width_m == pytest.approx(np.full(len(run.width_m), 100.0))


def _random_dataset(rng, grid, n_flows):
    cells = {}
    origins, dests, counts = [], [], []
    seen = set()
    while len(seen) < n_flows:
        o, d = rng.integers(0, grid.n_cells, 2)
        if o == d or (d, o) in seen or (o, d) in seen:
            continue
        seen.add((o, d))
        gc = rng.integers(0, 20, 4)
        if gc.sum() == 0:
            gc[int(rng.integers(0, 4))] = 1
        origins.append(int(o))
        dests.append(int(d))
        counts.append(gc)
        if d not in cells:
            log10_mu = float(rng.uniform(-0.5, 4.0))
            h = 0.0 if log10_mu <= 0 else 1000.0 * log10_mu**2
            cells[int(d)] = CellStats(cell_id=int(d), visitors=int(gc.sum()),
                                      visits=int(gc.sum() * 3), mu=10**log10_mu,
                                      log10_mu=log10_mu, height_m=h)
    order = np.lexsort((origins, dests))
    table = FlowTable(origin=np.array(origins)[order], dest=np.array(dests)[order],
                      group_counts=np.array(counts)[order])
    return table, cells


class TestCompileBundle:
    GRID = GridSpec(n_cols=40, n_rows=40)

    def test_empty_bundle_is_valid(self):
        b = compile_bundle(FlowTable.empty(), {}, OPEN_PRESET, self.GRID)
        assert b.manifest["counts"] == {"flows": 0, "vertices": 0}
        assert b.vertex_bytes() == b.flow_bytes() == b""

    def test_buffer_layout_arithmetic(self):
        rng = np.random.default_rng(8)
        table, cells = _random_dataset(rng, self.GRID, 50)
        b = compile_bundle(table, cells, OPEN_PRESET, self.GRID, n_vertices=32)
        assert len(b.vertex_bytes()) == 24 * b.manifest["counts"]["vertices"]
        assert len(b.flow_bytes()) == 20 * b.manifest["counts"]["flows"]
        assert b.manifest["counts"]["vertices"] == 32 * b.manifest["counts"]["flows"]

    def test_vertices_grouped_per_flow(self):
        rng = np.random.default_rng(9)
        table, cells = _random_dataset(rng, self.GRID, 20)
        b = compile_bundle(table, cells, OPEN_PRESET, self.GRID)
        for i, rec in enumerate(b.flow_records):
            chunk = b.vertices[rec["first_vertex"]: rec["first_vertex"] + rec["vertex_count"]]
            assert (chunk["flow_index"] == i).all()

    def test_worker_count_does_not_change_bytes(self):
        rng = np.random.default_rng(10)
        table, cells = _random_dataset(rng, self.GRID, 120)
        one = compile_bundle(table, cells, OPEN_PRESET, self.GRID, workers=1)
        many = compile_bundle(table, cells, OPEN_PRESET, self.GRID, workers=8)
        assert one.vertex_bytes() == many.vertex_bytes()
        assert one.flow_bytes() == many.flow_bytes()
        assert one.manifest == many.manifest

    def test_preset_filters_flows(self):
        rng = np.random.default_rng(11)
        table, cells = _random_dataset(rng, self.GRID, 60)
        strict = LayerPreset("strict", 1e9, np.inf)
        b = compile_bundle(table, cells, strict, self.GRID)
        assert b.manifest["counts"]["flows"] == 0

    def test_dtype_sizes(self):
        assert VERTEX_DTYPE.itemsize == 24
        assert FLOW_DTYPE.itemsize == 20


class TestGeometryContract:
    """First vertex grounded, last at the mountain height, monotone ascent,
    straight plan view."""

    def test_thousand_random_flows(self):
        rng = np.random.default_rng(4242)
        grid = GridSpec(n_cols=60, n_rows=60)
        n_checked = 0
        while n_checked < 1000:
            o, d = (int(x) for x in rng.integers(0, grid.n_cells, 2))
            if o == d:
                continue
            log10_mu = float(rng.uniform(-1, 4))
            mu = 10**log10_mu
            h = 0.0 if mu <= 1 else 1000.0 * log10_mu**2
            gc = tuple(int(x) for x in rng.integers(0, 50, 4))
            if sum(gc) == 0:
                gc = (1, 0, 0, 0)
            cells = {d: CellStats(cell_id=d, visitors=sum(gc), visits=sum(gc),
                                  mu=mu, log10_mu=log10_mu, height_m=h)}
            run = tessellate(Flow(o, d, gc, sum(gc)), cells, grid)
            assert run.xyz[0, 2] == 0.0
            assert abs(run.xyz[-1, 2] - h) <= 1e-9
            assert (np.diff(run.xyz[:, 2]) >= -1e-12).all()
            ox, oy = grid.center_m(o)
            dx, dy = grid.center_m(d)
            ex, ey = dx - ox, dy - oy
            # perpendicular distance from each vertex to the o -> d segment
            px = run.xyz[:, 0] - ox
            py = run.xyz[:, 1] - oy
            cross = np.abs(px * ey - py * ex) / np.hypot(ex, ey)
            assert (cross <= 1e-6).all()
            t_along = (px * ex + py * ey) / (ex * ex + ey * ey)
            assert (t_along >= -1e-9).all() and (t_along <= 1 + 1e-9).all()
            n_checked += 1
