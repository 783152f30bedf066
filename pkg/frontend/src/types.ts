export interface GridInfo {
  origin_x_m: number;
  origin_y_m: number;
  cell_size_m: number;
  n_cols: number;
  n_rows: number;
}

export interface Manifest {
  format_version: number;
  grid: GridInfo;
  params: {
    width: { base_m: number; exponent: number; min_m: number };
    arc_samples: number;
    vertices_per_flow: number;
    frequency_boundaries: number[][];
    height?: { exponent: number; scale_m: number };
    seed?: number;
  };
  preset: {
    name: string;
    min_dest_visitors: number;
    min_log10_mu: number | null;
    dest_rule: string;
    group_mask: number[];
    min_flow_visitors: number;
  };
  colors: number[][]; // 4 x RGBA, 0..255
  counts: { flows: number; vertices: number };
  buffers: { vertices: string; flows: string };
  bounds: { min: number[]; max: number[] };
}

/** Column view of the 24-byte vertex records. */
export interface VertexData {
  count: number;
  x: Float32Array;
  y: Float32Array;
  z: Float32Array;
  width: Float32Array;
  group: Uint8Array;
  flowIndex: Uint32Array;
}

/** Column view of the 20-byte flow records. */
export interface FlowData {
  count: number;
  firstVertex: Uint32Array;
  vertexCount: Uint32Array;
  originCell: Uint32Array;
  destCell: Uint32Array;
  totalVisitors: Uint32Array;
}

export interface LoadedBundle {
  manifest: Manifest;
  vertices: VertexData;
  flows: FlowData;
}

export interface CellInfo {
  cell_id: number;
  visitors: number;
  visits: number;
  mu: number;
  log10_mu: number;
  height_m: number;
  name: string | null;
  panel: string;
}

export interface DiscDot {
  radial: number;
  angle: number;
  group: number;
}

export interface DiscData {
  dest_cell: number;
  radius_km: number;
  dots: DiscDot[];
}

export interface FrameEvent {
  step: number;
  agent: string;
  to: number;
}
