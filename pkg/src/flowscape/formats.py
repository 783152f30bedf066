"""On-disk artifact formats, all byte-deterministic.

Text artifacts are UTF-8 with LF line endings; JSON numbers use Python's
shortest round-trip representation. Binary buffers are little-endian packed
records (24-byte vertices, 20-byte flow records).
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import BundleError, ConfigError
from .geometry import (FLOW_BUFFER_NAME, FLOW_DTYPE, GeometryBundle,
                       VERTEX_BUFFER_NAME, VERTEX_DTYPE)
from .ingest import FlowTable, VISIT_HEADER
from .law import CellStats
from .synth import TownSpec, TripEvent, VisitTable

FLOWS_HEADER = "origin_cell,dest_cell,g1,g2,g3,g4"
MANIFEST_NAME = "manifest.json"
CELLS_NAME = "cells.json"


# -- visits (schema B) -------------------------------------------------------

def write_visits_csv(visits: VisitTable, path: str | Path) -> None:
    lines = [VISIT_HEADER]
    labels = visits.user_labels
    for i in range(len(visits)):
        code = int(visits.user_code[i])
        user = labels[code] if labels is not None else f"u{code}"
        lines.append(f"{user},{visits.home[i]},{visits.dest[i]},{visits.f[i]}")
    Path(path).write_text("\n".join(lines) + "\n")


# -- cells.json --------------------------------------------------------------

def write_cells_json(cells: list[CellStats], path: str | Path) -> None:
    rows = [{"cell_id": c.cell_id, "visitors": c.visitors, "visits": c.visits,
             "mu": c.mu, "log10_mu": c.log10_mu, "height_m": c.height_m}
            for c in sorted(cells, key=lambda c: c.cell_id)]
    Path(path).write_text(json.dumps(rows, indent=2) + "\n")


def read_cells_json(path: str | Path) -> dict[int, CellStats]:
    rows = json.loads(Path(path).read_text())
    out: dict[int, CellStats] = {}
    for r in rows:
        c = CellStats(cell_id=int(r["cell_id"]), visitors=r["visitors"], visits=r["visits"],
                      mu=float(r["mu"]), log10_mu=float(r["log10_mu"]),
                      height_m=float(r["height_m"]))
        out[c.cell_id] = c
    return out


# -- flows.csv ---------------------------------------------------------------

def write_flows_csv(flows: FlowTable, path: str | Path) -> None:
    lines = [FLOWS_HEADER]
    gc = flows.group_counts
    for i in range(len(flows)):
        lines.append(f"{flows.origin[i]},{flows.dest[i]},{gc[i, 0]},{gc[i, 1]},{gc[i, 2]},{gc[i, 3]}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_flows_csv(path: str | Path) -> FlowTable:
    text = Path(path).read_text()
    lines = text.splitlines()
    if not lines:
        return FlowTable.empty()
    if lines[0] != FLOWS_HEADER:
        raise BundleError(f"{path}: expected header '{FLOWS_HEADER}'")
    n = len(lines) - 1
    origin = np.zeros(n, dtype=np.int64)
    dest = np.zeros(n, dtype=np.int64)
    gc = np.zeros((n, 4), dtype=np.int64)
    for i, line in enumerate(lines[1:]):
        parts = line.split(",")
        origin[i], dest[i] = int(parts[0]), int(parts[1])
        gc[i] = [int(p) for p in parts[2:6]]
    order = np.lexsort((origin, dest))
    return FlowTable(origin=origin[order], dest=dest[order], group_counts=gc[order])


# -- towns / names / ground truth -------------------------------------------

def load_towns(path: str | Path) -> list[TownSpec]:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise ConfigError(f"towns file {path} is not valid JSON: {e}") from e
    if not isinstance(doc, list):
        raise ConfigError(f"towns file {path} must hold a JSON array")
    towns = []
    for i, t in enumerate(doc):
        extra = set(t) - {"cell", "peak_mu", "radius_km"}
        if extra:
            raise ConfigError(f"town {i}: unknown keys {sorted(extra)}")
        try:
            towns.append(TownSpec(cell=int(t["cell"]), peak_mu=float(t["peak_mu"]),
                                  radius_km=float(t["radius_km"])))
        except KeyError as e:
            raise ConfigError(f"town {i}: missing key {e}") from e
    return towns


def write_truth_json(mu_map: np.ndarray, towns: list[TownSpec], seed: int,
                     path: str | Path) -> None:
    doc = {
        "seed": seed,
        "towns": [{"cell": t.cell, "peak_mu": t.peak_mu, "radius_km": t.radius_km}
                  for t in towns],
        "mu": [float(m) for m in mu_map],
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def read_truth_json(path: str | Path) -> np.ndarray:
    doc = json.loads(Path(path).read_text())
    return np.asarray(doc["mu"], dtype=np.float64)


def load_names(path: str | Path) -> dict[int, str]:
    doc = json.loads(Path(path).read_text())
    if not isinstance(doc, dict):
        raise ConfigError(f"names file {path} must hold a JSON object")
    return {int(k): str(v) for k, v in doc.items()}


# -- frames stream -----------------------------------------------------------

def write_frames_ndjson(events: list[TripEvent], path: str | Path) -> None:
    lines = [json.dumps({"step": e.step, "agent": e.agent_id, "to": e.dest_cell},
                        separators=(",", ":")) for e in events]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))


def read_frames_ndjson(path: str | Path) -> list[TripEvent]:
    events = []
    for line in Path(path).read_text().splitlines():
        if not line:
            continue
        d = json.loads(line)
        events.append(TripEvent(step=int(d["step"]), agent_id=str(d["agent"]),
                                dest_cell=int(d["to"])))
    return events


# -- geometry bundle ---------------------------------------------------------

def serialize_manifest(manifest: dict) -> bytes:
    return (json.dumps(manifest, indent=2) + "\n").encode()


def write_bundle(bundle: GeometryBundle, out_dir: str | Path) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / MANIFEST_NAME).write_bytes(serialize_manifest(bundle.manifest))
    (out / VERTEX_BUFFER_NAME).write_bytes(bundle.vertex_bytes())
    (out / FLOW_BUFFER_NAME).write_bytes(bundle.flow_bytes())


def read_bundle(bundle_dir: str | Path) -> GeometryBundle:
    """Load and cross-check a bundle; inconsistent sizes raise BundleError."""
    d = Path(bundle_dir)
    manifest_path = d / MANIFEST_NAME
    if not manifest_path.exists():
        raise BundleError(f"{d}: missing {MANIFEST_NAME}")
    try:
        manifest = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as e:
        raise BundleError(f"{manifest_path}: invalid JSON: {e}") from e
    for key in ("format_version", "counts", "buffers"):
        if key not in manifest:
            raise BundleError(f"{manifest_path}: missing '{key}'")
    counts = manifest["counts"]
    vpath = d / manifest["buffers"]["vertices"]
    fpath = d / manifest["buffers"]["flows"]
    for p in (vpath, fpath):
        if not p.exists():
            raise BundleError(f"{d}: missing buffer {p.name}")
    vbytes = vpath.read_bytes()
    fbytes = fpath.read_bytes()
    if len(vbytes) != counts["vertices"] * VERTEX_DTYPE.itemsize:
        raise BundleError(f"{vpath.name}: {len(vbytes)} bytes, expected "
                          f"{counts['vertices']} x {VERTEX_DTYPE.itemsize}")
    if len(fbytes) != counts["flows"] * FLOW_DTYPE.itemsize:
        raise BundleError(f"{fpath.name}: {len(fbytes)} bytes, expected "
                          f"{counts['flows']} x {FLOW_DTYPE.itemsize}")
    return GeometryBundle(manifest=manifest,
                          vertices=np.frombuffer(vbytes, dtype=VERTEX_DTYPE),
                          flow_records=np.frombuffer(fbytes, dtype=FLOW_DTYPE))
