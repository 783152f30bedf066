"""Pipeline stage drivers shared by the CLI and the service layer."""

from __future__ import annotations

import multiprocessing
import shutil
from pathlib import Path

import numpy as np

from . import formats
from .config import PipelineConfig
from .errors import ParseError, ParseFailure
from .geometry import compile_bundle
from .ingest import (PING_HEADER, VISIT_HEADER, aggregate_visits, build_flows,
                     build_spectra, parse_pings, parse_visits)
from .law import cell_stats
from .layers import disc_snapshot, export_frames, get_preset
from .synth import (SyntheticWorld, TripEvent, VisitTable, _sample_columns,
                    build_world, playback_init, sample_visits)


def run_synth(config: PipelineConfig, towns_path: str | Path, visits_out: str | Path,
              truth_out: str | Path, *, workers: int = 1) -> dict:
    """Build the synthetic world, sample visitors, write visits + ground truth."""
    towns = formats.load_towns(towns_path)
    world = build_world(config.grid, towns, seed=config.seed)
    if workers > 1:
        visits = _sample_parallel(world, config.r_max_km, config.seed, workers)
    else:
        visits = sample_visits(world, config.r_max_km, seed=config.seed)
    formats.write_visits_csv(visits, visits_out)
    formats.write_truth_json(world.mu_map, towns, config.seed, truth_out)
    return {"visits": len(visits), "towns": len(towns)}


def _synth_worker(args: tuple) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    world, r_max_km, seed, dest_cells = args
    return _sample_columns(world, r_max_km, 30, seed, dest_cells=dest_cells)


def _sample_parallel(world: SyntheticWorld, r_max_km: float, seed: int,
                     workers: int) -> VisitTable:
    """Partition destinations across workers; per-destination streams make
    the merged output identical to a single-worker run."""
    chunks = np.array_split(np.arange(world.grid.n_cells, dtype=np.int64), workers)
    jobs = [(world, r_max_km, seed, c) for c in chunks if c.size]
    with multiprocessing.get_context("fork").Pool(workers) as pool:
        parts = pool.map(_synth_worker, jobs)
    home = np.concatenate([p[0] for p in parts])
    dest = np.concatenate([p[1] for p in parts])
    f = np.concatenate([p[2] for p in parts])
    return VisitTable(home, dest, f, np.arange(len(home), dtype=np.int64))


def _load_visits(config: PipelineConfig, input_path: str | Path, *,
                 schema: str = "auto", clip: bool = False) -> VisitTable:
    path = Path(input_path)
    text = path.read_text()
    lines = text.splitlines()
    if schema == "auto":
        head = lines[0] if lines else ""
        if head == PING_HEADER:
            schema = "pings"
        elif head == VISIT_HEADER or not lines:
            schema = "visits"
        else:
            raise ParseError(1, f"unrecognized header '{head}'")
    errors: list[ParseError] = []
    sink = errors.append
    if schema == "pings":
        records = list(parse_pings(lines, on_error=sink))
        if errors:
            raise ParseFailure(errors)
        return aggregate_visits(records, config.grid, clip=clip)
    visits = parse_visits(lines, on_error=sink)
    if errors:
        raise ParseFailure(errors)
    return visits


def run_fit(config: PipelineConfig, input_path: str | Path, cells_out: str | Path,
            flows_out: str | Path, *, schema: str = "auto", clip: bool = False) -> dict:
    """Ingest records, fit per-cell stats, and write cells.json + flows.csv."""
    visits = _load_visits(config, input_path, schema=schema, clip=clip)
    spectra = build_spectra(visits, config.grid)
    cells = [cell_stats(spectra[d], config.height) for d in sorted(spectra)]
    formats.write_cells_json(cells, cells_out)
    flows = build_flows(visits, config.freq_table)
    formats.write_flows_csv(flows, flows_out)
    return {"visits": len(visits), "cells": len(cells), "flows": len(flows)}


def run_compile(config: PipelineConfig, cells_path: str | Path, flows_path: str | Path,
                out_dir: str | Path, *, preset_name: str | None = None,
                workers: int = 1) -> dict:
    """Compile the preset-passing flows into a bundle directory.

    cells.json is copied in verbatim so the directory is self-contained for
    serving."""
    cells = formats.read_cells_json(cells_path)
    flows = formats.read_flows_csv(flows_path)
    preset = get_preset(preset_name or config.preset)
    bundle = compile_bundle(
        flows, cells, preset, config.grid,
        width_params=config.width, freq_table=config.freq_table,
        arc_samples=config.arc_samples, n_vertices=config.vertices_per_flow,
        extra_params={"height": {"exponent": config.height.exponent,
                                 "scale_m": config.height.scale_m},
                      "seed": config.seed},
        workers=workers)
    formats.write_bundle(bundle, out_dir)
    out = Path(out_dir)
    if Path(cells_path).resolve() != (out / formats.CELLS_NAME).resolve():
        shutil.copyfile(cells_path, out / formats.CELLS_NAME)
    return {"flows": bundle.manifest["counts"]["flows"],
            "vertices": bundle.manifest["counts"]["vertices"]}


def run_disc(config: PipelineConfig, visits_path: str | Path, cell: int,
             radius_km: float, out_path: str | Path, *,
             scatter_seed: int | None = None) -> dict:
    import json

    visits = _load_visits(config, visits_path)
    snap = disc_snapshot(cell, visits, config.grid, radius_km,
                         freq_table=config.freq_table, scatter_seed=scatter_seed)
    Path(out_path).write_text(json.dumps(snap.to_dict(), indent=2) + "\n")
    return {"dots": len(snap)}


def run_frames(config: PipelineConfig, visits_path: str | Path, sample_size: int,
               n_steps: int, out_path: str | Path) -> dict:
    visits = _load_visits(config, visits_path)
    agents = playback_init(visits, sample_size, seed=config.seed)
    events = export_frames(agents, n_steps, seed=config.seed)
    # step-0 records anchor every agent at home, so stream consumers can
    # draw the return legs without a second file format
    preamble = [TripEvent(0, a.agent_id, a.home_cell)
                for a in sorted(agents, key=lambda a: a.agent_id)]
    formats.write_frames_ndjson(preamble + events, out_path)
    return {"agents": len(agents), "events": len(events)}
