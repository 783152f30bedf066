"""Command-line driver: synth, fit, compile, disc, frames, serve.

Thin wrappers over the pipeline functions; every command is deterministic
given (inputs, seed, config). Exit codes: 0 success, 1 data error,
2 usage or config error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .config import PipelineConfig, load_config
from .errors import ConfigError, FlowscapeError
from . import pipeline


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, default=None, help="pipeline config JSON")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--workers", type=int, default=1, help="parallel workers")
    p.add_argument("--preset", default=None, help="override the config preset")


def build_parser() -> argparse.ArgumentParser:
    root = argparse.ArgumentParser(prog="flowscape",
                                   description="mobility flows to 3D attractiveness landscapes")
    sub = root.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="sample synthetic visits from a town config")
    _add_common(p)
    p.add_argument("--towns", type=Path, required=True, help="towns JSON (cell, peak_mu, radius_km)")
    p.add_argument("--out-visits", type=Path, required=True)
    p.add_argument("--out-truth", type=Path, required=True)
    p.add_argument("--r-max-km", type=float, default=None, help="override sampling radius")

    p = sub.add_parser("fit", help="fit per-cell stats and flows from visits or pings")
    _add_common(p)
    p.add_argument("--input", type=Path, required=True, help="schema A (pings) or B (visits) CSV")
    p.add_argument("--schema", choices=["auto", "pings", "visits"], default="auto")
    p.add_argument("--clip", action="store_true", help="drop out-of-grid pings instead of failing")
    p.add_argument("--out-cells", type=Path, required=True)
    p.add_argument("--out-flows", type=Path, required=True)

    p = sub.add_parser("compile", help="compile flows + cells into a geometry bundle")
    _add_common(p)
    p.add_argument("--cells", type=Path, required=True)
    p.add_argument("--flows", type=Path, required=True)
    p.add_argument("--out-dir", type=Path, required=True)

    p = sub.add_parser("disc", help="radial visitor snapshot for one destination")
    _add_common(p)
    p.add_argument("--visits", type=Path, required=True)
    p.add_argument("--cell", type=int, required=True)
    p.add_argument("--radius-km", type=float, default=50.0)
    p.add_argument("--scatter-angle", action="store_true",
                   help="seeded random angles instead of true azimuths")
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("frames", help="sample playback agents and export a trip stream")
    _add_common(p)
    p.add_argument("--visits", type=Path, required=True)
    p.add_argument("--sample-size", type=int, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("serve", help="serve a bundle directory over HTTP")
    _add_common(p)
    p.add_argument("--bundle", type=Path, required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--names", type=Path, default=None, help="cell_id -> name JSON")
    p.add_argument("--visits", type=Path, default=None, help="visits CSV for disc views")
    p.add_argument("--frames", type=Path, default=None, help="frames NDJSON stream")
    p.add_argument("--static-dir", type=Path, default=None, help="viewer build to mount at /")
    return root


def _load(args: argparse.Namespace) -> PipelineConfig:
    config = load_config(args.config) if args.config else PipelineConfig()
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    if args.preset is not None:
        config = replace(config, preset=args.preset)
    if getattr(args, "r_max_km", None) is not None:
        config = replace(config, r_max_km=args.r_max_km)
    return config


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _load(args)
        if args.command == "synth":
            out = pipeline.run_synth(config, args.towns, args.out_visits, args.out_truth,
                                     workers=args.workers)
            print(f"synth: {out['visits']} visits from {out['towns']} town(s)")
        elif args.command == "fit":
            out = pipeline.run_fit(config, args.input, args.out_cells, args.out_flows,
                                   schema=args.schema, clip=args.clip)
            print(f"fit: {out['visits']} visits -> {out['cells']} cells, {out['flows']} flows")
        elif args.command == "compile":
            out = pipeline.run_compile(config, args.cells, args.flows, args.out_dir,
                                       workers=args.workers)
            print(f"compile: {out['flows']} flows, {out['vertices']} vertices")
        elif args.command == "disc":
            out = pipeline.run_disc(config, args.visits, args.cell, args.radius_km, args.out,
                                    scatter_seed=config.seed if args.scatter_angle else None)
            print(f"disc: {out['dots']} dots")
        elif args.command == "frames":
            out = pipeline.run_frames(config, args.visits, args.sample_size, args.steps, args.out)
            print(f"frames: {out['events']} events from {out['agents']} agents")
        elif args.command == "serve":
            from .service import create_app

            app = create_app(args.bundle, names_path=args.names, visits_path=args.visits,
                             frames_path=args.frames, static_dir=args.static_dir)
            import uvicorn

            uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except FlowscapeError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
