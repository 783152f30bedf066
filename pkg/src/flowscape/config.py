"""Pipeline configuration: one JSON document drives every stage."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError
from .geometry import WidthParams
from .grid import GridSpec
from .law import FrequencyGroupTable, GROUP_COLORS_RGBA, HeightParams
from .layers import get_preset


@dataclass(frozen=True)
class PipelineConfig:
    grid: GridSpec = GridSpec(n_cols=100, n_rows=100, cell_size_m=1000.0)
    freq_table: FrequencyGroupTable = FrequencyGroupTable()
    height: HeightParams = HeightParams()
    width: WidthParams = WidthParams()
    arc_samples: int = 64
    vertices_per_flow: int = 32
    preset: str = "peak5000"
    seed: int = 0
    r_max_km: float = 20.0

    def __post_init__(self) -> None:
        if self.arc_samples < 2 or self.vertices_per_flow < 2:
            raise ConfigError("arc_samples and vertices_per_flow must be >= 2")
        if self.r_max_km < 1:
            raise ConfigError(f"r_max_km must be >= 1, got {self.r_max_km}")
        get_preset(self.preset)  # unknown preset fails fast

    def to_dict(self) -> dict:
        g = self.grid
        return {
            "grid": {"origin_x_m": g.origin_x_m, "origin_y_m": g.origin_y_m,
                     "cell_size_m": g.cell_size_m, "n_cols": g.n_cols, "n_rows": g.n_rows},
            "frequency_boundaries": [list(b) for b in self.freq_table.boundaries],
            "colors": [list(c) for c in self.freq_table.colors],
            "height": {"exponent": self.height.exponent, "scale_m": self.height.scale_m},
            "width": {"base_m": self.width.base_m, "exponent": self.width.exponent,
                      "min_m": self.width.min_m},
            "arc_samples": self.arc_samples,
            "vertices_per_flow": self.vertices_per_flow,
            "preset": self.preset,
            "seed": self.seed,
            "r_max_km": self.r_max_km,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def _take(d: dict, known: set[str], where: str) -> None:
    unknown = set(d) - known
    if unknown:
        raise ConfigError(f"unknown {where} keys: {sorted(unknown)}")


def config_from_dict(doc: dict) -> PipelineConfig:
    _take(doc, {"grid", "frequency_boundaries", "colors", "height", "width",
                "arc_samples", "vertices_per_flow", "preset", "seed", "r_max_km"}, "config")
    defaults = PipelineConfig()
    grid = defaults.grid
    if "grid" in doc:
        _take(doc["grid"], {"origin_x_m", "origin_y_m", "cell_size_m", "n_cols", "n_rows"}, "grid")
        grid = GridSpec(**doc["grid"])
    boundaries = tuple(tuple(b) for b in doc.get(
        "frequency_boundaries", defaults.freq_table.boundaries))
    colors = tuple(tuple(c) for c in doc.get("colors", GROUP_COLORS_RGBA))
    height = defaults.height
    if "height" in doc:
        _take(doc["height"], {"exponent", "scale_m"}, "height")
        height = HeightParams(**doc["height"])
    width = defaults.width
    if "width" in doc:
        _take(doc["width"], {"base_m", "exponent", "min_m"}, "width")
        width = WidthParams(**doc["width"])
    try:
        return PipelineConfig(
            grid=grid,
            freq_table=FrequencyGroupTable(boundaries=boundaries, colors=colors),
            height=height,
            width=width,
            arc_samples=int(doc.get("arc_samples", defaults.arc_samples)),
            vertices_per_flow=int(doc.get("vertices_per_flow", defaults.vertices_per_flow)),
            preset=doc.get("preset", defaults.preset),
            seed=int(doc.get("seed", defaults.seed)),
            r_max_km=float(doc.get("r_max_km", defaults.r_max_km)),
        )
    except (TypeError, ValueError) as e:
        raise ConfigError(f"bad config value: {e}") from e


def load_config(path: str | Path) -> PipelineConfig:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise ConfigError(f"config {path} is not valid JSON: {e}") from e
    if not isinstance(doc, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    return config_from_dict(doc)
