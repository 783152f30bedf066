"""flowscape: mobility flows fitted, stacked into mountains, and served.

Pipeline: visits (real or sampled from the inverse-square visitation law)
-> per-cell attractiveness and origin-destination flows -> deterministic
binary 3D geometry bundles -> a small HTTP server feeding a browser viewer.
"""

__version__ = "0.1.0"

from .config import PipelineConfig, load_config
from .errors import FlowscapeError
from .grid import GridSpec, cell_distance_km, cell_of, ring_of
from .law import (CellStats, FrequencyGroupTable, HeightParams, MuFit,
                  VisitationSpectrum, cell_stats, estimate_mu, expected_visitors,
                  freq_group, mountain_height)
from .synth import (PlaybackAgent, SyntheticWorld, TownSpec, TripEvent, UserVisit,
                    VisitTable, build_world, playback_init, playback_step,
                    sample_visits)
from .ingest import (Flow, FlowTable, PingRecord, aggregate_visits, build_flows,
                     build_spectra, parse_pings, parse_visits)
from .geometry import (CurveControl, FlowSegmentation, GeometryBundle, VertexRun,
                       WidthParams, arc_table, compile_bundle, control_points,
                       eval_cubic, flow_width, subdivide, tessellate)
from .layers import (DiscSnapshot, LayerPreset, apply_preset, disc_snapshot,
                     export_frames, get_preset, panel_text, preset_catalog)

__all__ = [name for name in dir() if not name.startswith("_")]
