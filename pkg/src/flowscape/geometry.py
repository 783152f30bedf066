"""Flow geometry: cubic curves into binary mountain bundles.

Every flow is a cubic curve from its origin on the ground (z = 0) up to its
destination's attractiveness height. Control points sit at horizontal
thirds with z = (0, 0, h, h), which keeps the plan view a straight segment,
makes the ascent smooth and monotone (z(t) = h t^2 (3 - 2t)), and lets the
curves stack into mountains without crossing. Vertices are sampled
uniformly in arc length; group subdivision happens in arc length too, so
the visible band lengths match visitor shares.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import ConfigError, DegenerateFlow, MissingStats
from .grid import GridSpec
from .ingest import Flow, FlowTable
from .law import CellStats, DEFAULT_FREQ_TABLE, FrequencyGroupTable
from .layers import LayerPreset, apply_preset

VERTEX_DTYPE = np.dtype([
    ("x", "<f4"), ("y", "<f4"), ("z", "<f4"), ("width", "<f4"),
    ("group", "u1"), ("flags", "u1"), ("pad", "<u2"), ("flow_index", "<u4"),
])
FLOW_DTYPE = np.dtype([
    ("first_vertex", "<u4"), ("vertex_count", "<u4"),
    ("origin_cell", "<u4"), ("dest_cell", "<u4"), ("total_visitors", "<u4"),
])
FORMAT_VERSION = 1
VERTEX_BUFFER_NAME = "vertices.bin"
FLOW_BUFFER_NAME = "flows.bin"

assert VERTEX_DTYPE.itemsize == 24 and FLOW_DTYPE.itemsize == 20


@dataclass(frozen=True)
class WidthParams:
    """Flow line width in meters: max(min_m, base_m * visitors ** exponent)."""

    base_m: float = 10.0
    exponent: float = 0.5
    min_m: float = 2.0

    def __post_init__(self) -> None:
        if self.base_m <= 0 or self.exponent <= 0 or self.min_m < 0:
            raise ConfigError(f"invalid width params {self}")


def flow_width(total_visitors: int, params: WidthParams = WidthParams()) -> float:
    if total_visitors < 1:
        raise ValueError(f"total_visitors must be >= 1, got {total_visitors}")
    return max(params.min_m, params.base_m * total_visitors**params.exponent)


@dataclass(frozen=True)
class CurveControl:
    p0: tuple[float, float, float]
    p1: tuple[float, float, float]
    p2: tuple[float, float, float]
    p3: tuple[float, float, float]


def control_points(o_center: tuple[float, float], d_center: tuple[float, float],
                   dest_height_m: float) -> CurveControl:
    """Thirds control scheme: P0/P1 on the ground, P2/P3 at the destination
    height, all on the o->d line in plan view."""
    if dest_height_m < 0:
        raise ValueError(f"height must be non-negative, got {dest_height_m}")
    ox, oy = o_center
    dx, dy = d_center
    if ox == dx and oy == dy:
        raise DegenerateFlow(f"origin and destination coincide at ({ox}, {oy})")
    ex, ey = dx - ox, dy - oy
    h = dest_height_m
    return CurveControl(
        p0=(ox, oy, 0.0),
        p1=(ox + ex / 3.0, oy + ey / 3.0, 0.0),
        p2=(ox + 2.0 * ex / 3.0, oy + 2.0 * ey / 3.0, h),
        p3=(dx, dy, h),
    )


def eval_cubic(cp: CurveControl, t: float | np.ndarray) -> np.ndarray:
    """Cubic Bernstein point(s); t in [0, 1]. Returns shape (..., 3)."""
    t = np.asarray(t, dtype=np.float64)
    if np.any(t < 0) or np.any(t > 1):
        raise ValueError("curve parameter outside [0, 1]")
    u = 1.0 - t
    b = np.stack([u**3, 3 * u**2 * t, 3 * u * t**2, t**3], axis=-1)
    pts = np.array([cp.p0, cp.p1, cp.p2, cp.p3], dtype=np.float64)
    return b @ pts


def arc_table(cp: CurveControl, samples: int = 64) -> np.ndarray:
    """Cumulative chord lengths at samples+1 uniform t values; entry 0 is 0
    and the last entry is the curve's (approximate) total length."""
    if samples < 2:
        raise ValueError(f"need at least 2 arc samples, got {samples}")
    pts = eval_cubic(cp, np.linspace(0.0, 1.0, samples + 1))
    chords = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    return np.concatenate([[0.0], np.cumsum(chords)])


@dataclass(frozen=True)
class FlowSegmentation:
    """Contiguous (t0, t1, group) spans covering [0, 1], ascending group
    order, empty groups omitted. Spans are arc-length shares mapped back to
    curve parameter t."""

    segments: tuple[tuple[float, float, int], ...]


def subdivide(flow: Flow, table: np.ndarray) -> FlowSegmentation:
    """Split a flow's curve so each frequency group's arc length share
    equals its share of visitors, group 1 at the origin end."""
    total = flow.total_visitors
    total_len = table[-1]
    t_grid = np.linspace(0.0, 1.0, len(table))
    segments = []
    t0 = 0.0
    cum = 0
    for g, count in enumerate(flow.group_counts, start=1):
        if count == 0:
            continue
        cum += count
        t1 = 1.0 if cum == total else float(np.interp(cum / total * total_len, table, t_grid))
        segments.append((t0, t1, g))
        t0 = t1
    return FlowSegmentation(segments=tuple(segments))


@dataclass(eq=False)
class VertexRun:
    """Vertices for one flow: positions, per-vertex width and group."""

    xyz: np.ndarray      # (M, 3) float64
    width_m: np.ndarray  # (M,)
    group: np.ndarray    # (M,) uint8


def _tessellate_batch(o_xy: np.ndarray, d_xy: np.ndarray, height: np.ndarray,
                      group_counts: np.ndarray, arc_samples: int,
                      n_vertices: int) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized tessellation of B flows.

    Returns (xyz (B, M, 3) float64, group (B, M) uint8). Vertices are
    uniform in arc length; group boundaries snap to vertex indices
    (floor(share * M + 0.5)), which guarantees any group holding at least
    1/M of the visitors owns at least one vertex. Endpoints are exact:
    t=0 gives z=0, t=1 gives z=height."""
    B = o_xy.shape[0]
    K, M = arc_samples, n_vertices
    delta = d_xy - o_xy                        # (B, 2)
    l_xy = np.hypot(delta[:, 0], delta[:, 1])  # (B,)
    if np.any(l_xy == 0):
        raise DegenerateFlow("a flow's origin and destination coincide")

    t = np.linspace(0.0, 1.0, K + 1)
    z_prof = t * t * (3.0 - 2.0 * t)                        # (K+1,)
    z = height[:, None] * z_prof[None, :]                   # (B, K+1)
    chord = np.hypot(l_xy[:, None] / K, np.diff(z, axis=1))  # (B, K)
    cum = np.concatenate([np.zeros((B, 1)), np.cumsum(chord, axis=1)], axis=1)
    total_len = cum[:, -1]

    # Inverse arc-length lookup via row-wise bisection. Comparisons touch the
    # raw float values only, so results cannot depend on how flows were
    # chunked across workers.
    s = total_len[:, None] * (np.arange(M) / (M - 1))[None, :]   # (B, M)
    rows = np.arange(B)[:, None]
    lo = np.zeros((B, M), dtype=np.int64)
    hi = np.full((B, M), K + 1, dtype=np.int64)
    for _ in range(int(np.ceil(np.log2(K + 2))) + 1):
        mid = (lo + hi) // 2
        below = cum[rows, np.minimum(mid, K)] < s
        lo = np.where(below, mid + 1, lo)
        hi = np.where(below, hi, mid)
    j = np.clip(lo, 1, K)
    seg_len = cum[rows, j] - cum[rows, j - 1]
    frac = (s - cum[rows, j - 1]) / seg_len
    t_at = (j - 1 + frac) / K
    t_at[:, 0] = 0.0
    t_at[:, -1] = 1.0

    xyz = np.empty((B, M, 3))
    xyz[:, :, 0] = o_xy[:, 0][:, None] + delta[:, 0][:, None] * t_at
    xyz[:, :, 1] = o_xy[:, 1][:, None] + delta[:, 1][:, None] * t_at
    xyz[:, :, 2] = height[:, None] * (t_at * t_at * (3.0 - 2.0 * t_at))

    totals = group_counts.sum(axis=1)
    shares = np.cumsum(group_counts, axis=1) / totals[:, None]   # (B, 4)
    idx = np.floor(shares * M + 0.5).astype(np.int64)
    idx[:, -1] = M
    lengths = np.diff(np.concatenate([np.zeros((B, 1), dtype=np.int64), idx], axis=1), axis=1)
    group = np.repeat(np.tile(np.arange(1, 5, dtype=np.uint8), B),
                      lengths.ravel()).reshape(B, M)
    return xyz, group


def tessellate(flow: Flow, cells: Mapping[int, CellStats], grid: GridSpec,
               width_params: WidthParams = WidthParams(), n_vertices: int = 32,
               arc_samples: int = 64) -> VertexRun:
    """Sample one flow's curve into n_vertices carrying width and group."""
    if n_vertices < 2:
        raise ValueError(f"need at least 2 vertices, got {n_vertices}")
    if flow.dest_cell not in cells:
        raise MissingStats(f"no stats for destination cell {flow.dest_cell}")
    o = np.array([grid.center_m(flow.origin_cell)])
    d = np.array([grid.center_m(flow.dest_cell)])
    h = np.array([cells[flow.dest_cell].height_m])
    counts = np.array([flow.group_counts], dtype=np.int64)
    xyz, group = _tessellate_batch(o, d, h, counts, arc_samples, n_vertices)
    width = np.full(n_vertices, flow_width(flow.total_visitors, width_params))
    return VertexRun(xyz=xyz[0], width_m=width, group=group[0])


@dataclass(eq=False)
class GeometryBundle:
    """Manifest plus packed vertex and flow-record buffers."""

    manifest: dict
    vertices: np.ndarray      # VERTEX_DTYPE
    flow_records: np.ndarray  # FLOW_DTYPE

    def vertex_bytes(self) -> bytes:
        return self.vertices.tobytes()

    def flow_bytes(self) -> bytes:
        return self.flow_records.tobytes()


def _pack_chunk(o_xy: np.ndarray, d_xy: np.ndarray, height: np.ndarray,
                group_counts: np.ndarray, widths: np.ndarray, flow_index0: int,
                arc_samples: int, n_vertices: int) -> np.ndarray:
    """Tessellate and pack one chunk of flows into VERTEX_DTYPE records."""
    B, M = o_xy.shape[0], n_vertices
    xyz, group = _tessellate_batch(o_xy, d_xy, height, group_counts, arc_samples, M)
    out = np.zeros(B * M, dtype=VERTEX_DTYPE)
    out["x"] = xyz[:, :, 0].ravel().astype(np.float32)
    out["y"] = xyz[:, :, 1].ravel().astype(np.float32)
    out["z"] = xyz[:, :, 2].ravel().astype(np.float32)
    out["width"] = np.repeat(widths, M).astype(np.float32)
    out["group"] = group.ravel()
    out["flow_index"] = np.repeat(np.arange(flow_index0, flow_index0 + B, dtype=np.uint32), M)
    return out


def _compile_worker(args: tuple) -> np.ndarray:
    return _pack_chunk(*args)


def compile_bundle(flows: FlowTable, cells: Mapping[int, CellStats],
                   preset: LayerPreset, grid: GridSpec, *,
                   width_params: WidthParams = WidthParams(),
                   freq_table: FrequencyGroupTable = DEFAULT_FREQ_TABLE,
                   arc_samples: int = 64, n_vertices: int = 32,
                   extra_params: dict | None = None,
                   workers: int = 1) -> GeometryBundle:
    """Compile every preset-passing flow into a deterministic bundle.

    Flows keep their canonical (dest, origin) order; output bytes are
    identical for any worker count because chunks are reassembled in order
    and each flow's math is independent of its neighbors."""
    if arc_samples < 2 or n_vertices < 2:
        raise ConfigError("arc_samples and n_vertices must be >= 2")
    _, flow_idx = apply_preset(cells, flows, preset)
    n_flows = len(flow_idx)
    M = n_vertices

    if n_flows:
        origin = flows.origin[flow_idx]
        dest = flows.dest[flow_idx]
        counts = flows.group_counts[flow_idx]
        totals = counts.sum(axis=1)
        o_x, o_y = grid.centers_m(origin)
        d_x, d_y = grid.centers_m(dest)
        o_xy = np.stack([o_x, o_y], axis=1)
        d_xy = np.stack([d_x, d_y], axis=1)
        height = np.array([cells[int(d)].height_m for d in dest])
        widths = np.maximum(width_params.min_m,
                            width_params.base_m * totals.astype(np.float64)**width_params.exponent)

        # Cap chunk size to bound transient memory; per-flow math does not
        # depend on chunk boundaries, so the cap cannot change the bytes.
        chunk = min(max(1, -(-n_flows // max(1, workers))), 16384)
        jobs = [(o_xy[a:a + chunk], d_xy[a:a + chunk], height[a:a + chunk],
                 counts[a:a + chunk], widths[a:a + chunk], a, arc_samples, M)
                for a in range(0, n_flows, chunk)]
        if workers > 1 and len(jobs) > 1:
            import multiprocessing

            with multiprocessing.get_context("fork").Pool(workers) as pool:
                parts = pool.map(_compile_worker, jobs)
        else:
            parts = [_pack_chunk(*j) for j in jobs]
        vertices = np.concatenate(parts)

        flow_records = np.zeros(n_flows, dtype=FLOW_DTYPE)
        flow_records["first_vertex"] = np.arange(n_flows, dtype=np.uint32) * M
        flow_records["vertex_count"] = M
        flow_records["origin_cell"] = origin.astype(np.uint32)
        flow_records["dest_cell"] = dest.astype(np.uint32)
        flow_records["total_visitors"] = totals.astype(np.uint32)
        bounds_min = [float(vertices["x"].min()), float(vertices["y"].min()), float(vertices["z"].min())]
        bounds_max = [float(vertices["x"].max()), float(vertices["y"].max()), float(vertices["z"].max())]
    else:
        vertices = np.zeros(0, dtype=VERTEX_DTYPE)
        flow_records = np.zeros(0, dtype=FLOW_DTYPE)
        bounds_min = [grid.origin_x_m, grid.origin_y_m, 0.0]
        bounds_max = [grid.origin_x_m + grid.n_cols * grid.cell_size_m,
                      grid.origin_y_m + grid.n_rows * grid.cell_size_m, 0.0]

    manifest = {
        "format_version": FORMAT_VERSION,
        "grid": {
            "origin_x_m": grid.origin_x_m, "origin_y_m": grid.origin_y_m,
            "cell_size_m": grid.cell_size_m, "n_cols": grid.n_cols, "n_rows": grid.n_rows,
        },
        "params": {
            "width": {"base_m": width_params.base_m, "exponent": width_params.exponent,
                      "min_m": width_params.min_m},
            "arc_samples": arc_samples,
            "vertices_per_flow": M,
            "frequency_boundaries": [list(b) for b in freq_table.boundaries],
            **(extra_params or {}),
        },
        "preset": {
            "name": preset.name,
            "min_dest_visitors": preset.min_dest_visitors,
            "min_log10_mu": None if preset.min_log10_mu == -np.inf else preset.min_log10_mu,
            "dest_rule": preset.dest_rule,
            "group_mask": sorted(preset.group_mask),
            "min_flow_visitors": preset.min_flow_visitors,
        },
        "colors": [list(c) for c in freq_table.colors],
        "counts": {"flows": int(n_flows), "vertices": int(len(vertices))},
        "buffers": {"vertices": VERTEX_BUFFER_NAME, "flows": FLOW_BUFFER_NAME},
        "bounds": {"min": bounds_min, "max": bounds_max},
    }
    return GeometryBundle(manifest=manifest, vertices=vertices, flow_records=flow_records)
