"""HTTP service over a compiled bundle directory.

Read-only: every response is either the exact bytes of an on-disk artifact
or a view derived from artifacts loaded once at startup. Artifact responses
carry content-addressed ETags, so browser viewers can cache buffers hard.
"""

from __future__ import annotations

import hashlib
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from . import formats
from .errors import BundleError, FlowscapeError
from .grid import GridSpec
from .law import FrequencyGroupTable
from .layers import disc_snapshot, panel_text
from .synth import VisitTable

MEDIA_TYPES = {
    ".json": "application/json",
    ".bin": "application/octet-stream",
    ".ndjson": "application/x-ndjson",
    ".csv": "text/csv",
}


class CellResponse(BaseModel):
    cell_id: int
    visitors: int | float
    visits: int | float
    mu: float
    log10_mu: float
    height_m: float
    name: str | None = None
    panel: str


class DiscDot(BaseModel):
    radial: float
    angle: float
    group: int


class DiscResponse(BaseModel):
    dest_cell: int
    radius_km: float
    dots: list[DiscDot]


class _Artifact:
    """An immutable served file: bytes, content hash, media type."""

    def __init__(self, path: Path):
        self.body = path.read_bytes()
        self.etag = '"' + hashlib.sha256(self.body).hexdigest() + '"'
        self.media_type = MEDIA_TYPES.get(path.suffix, "application/octet-stream")

    def respond(self, request: Request) -> Response:
        headers = {"ETag": self.etag, "Cache-Control": "public, max-age=31536000, immutable"}
        if request.headers.get("if-none-match") == self.etag:
            return Response(status_code=304, headers=headers)
        return Response(content=self.body, media_type=self.media_type, headers=headers)


def create_app(bundle_dir: str | Path, *, names_path: str | Path | None = None,
               visits_path: str | Path | None = None,
               frames_path: str | Path | None = None,
               static_dir: str | Path | None = None) -> FastAPI:
    """Build the app, validating the bundle up front (BundleError on junk).

    names.json, visits.csv, and frames.ndjson are picked up from the bundle
    directory when present; explicit paths override."""
    d = Path(bundle_dir)
    bundle = formats.read_bundle(d)  # raises BundleError on inconsistency
    cells_path = d / formats.CELLS_NAME
    if not cells_path.exists():
        raise BundleError(f"{d}: missing {formats.CELLS_NAME}")
    cells = formats.read_cells_json(cells_path)

    manifest = bundle.manifest
    grid = GridSpec(**manifest["grid"]) if "grid" in manifest else GridSpec()
    freq_table = FrequencyGroupTable(
        boundaries=tuple(tuple(b) for b in manifest["params"]["frequency_boundaries"]),
        colors=tuple(tuple(c) for c in manifest["colors"]),
    ) if "params" in manifest else FrequencyGroupTable()

    def _pick(explicit: str | Path | None, default_name: str) -> Path | None:
        if explicit is not None:
            return Path(explicit)
        p = d / default_name
        return p if p.exists() else None

    names: dict[int, str] = {}
    p = _pick(names_path, "names.json")
    if p is not None:
        names = formats.load_names(p)

    visits: VisitTable | None = None
    p = _pick(visits_path, "visits.csv")
    if p is not None:
        from .ingest import parse_visits
        visits = parse_visits(p.read_text().splitlines())

    artifacts = {"manifest": _Artifact(d / formats.MANIFEST_NAME),
                 "cells": _Artifact(cells_path)}
    frames_file = _pick(frames_path, "frames.ndjson")
    if frames_file is not None:
        artifacts["frames"] = _Artifact(frames_file)
    buffers = {name: _Artifact(d / name) for name in manifest["buffers"].values()}

    app = FastAPI(title="flowscape bundle server")
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["GET"],
                       allow_headers=["*"])

    @app.get("/api/manifest")
    def get_manifest(request: Request) -> Response:
        return artifacts["manifest"].respond(request)

    @app.get("/api/cells")
    def get_cells(request: Request) -> Response:
        return artifacts["cells"].respond(request)

    @app.get("/api/cell/{cell_id}", response_model=CellResponse)
    def get_cell(cell_id: int) -> CellResponse:
        stats = cells.get(cell_id)
        if stats is None:
            raise HTTPException(status_code=404, detail=f"no stats for cell {cell_id}")
        name = names.get(cell_id)
        return CellResponse(cell_id=stats.cell_id, visitors=stats.visitors,
                            visits=stats.visits, mu=stats.mu, log10_mu=stats.log10_mu,
                            height_m=stats.height_m, name=name,
                            panel=panel_text(stats, name))

    @app.get("/api/frames")
    def get_frames(request: Request) -> Response:
        if "frames" not in artifacts:
            raise HTTPException(status_code=404, detail="no frames stream in this bundle")
        return artifacts["frames"].respond(request)

    @app.get("/api/disc/{cell_id}", response_model=DiscResponse)
    def get_disc(cell_id: int, radius_km: float = 50.0) -> DiscResponse:
        if visits is None:
            raise HTTPException(status_code=404, detail="no visits data; start with --visits")
        if not 0 <= cell_id < grid.n_cells:
            raise HTTPException(status_code=404, detail=f"cell {cell_id} outside grid")
        try:
            snap = disc_snapshot(cell_id, visits, grid, radius_km, freq_table=freq_table)
        except FlowscapeError as e:
            raise HTTPException(status_code=400, detail=str(e)) from e
        return DiscResponse(dest_cell=snap.dest_cell, radius_km=snap.radius_km,
                            dots=[DiscDot(radial=float(r), angle=float(a), group=int(g))
                                  for r, a, g in zip(snap.radial, snap.angle, snap.group)])

    @app.get("/buffers/{name}")
    def get_buffer(name: str, request: Request) -> Response:
        if name not in buffers:
            raise HTTPException(status_code=404, detail=f"unknown buffer '{name}'")
        return buffers[name].respond(request)

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="viewer")

    return app
