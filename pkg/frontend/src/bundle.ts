// Bundle loading: manifest JSON plus little-endian packed buffers.
// Vertex records are 24 bytes (x,y,z,width f32; group,flags u8; pad u16;
// flow_index u32), flow records 20 bytes (five u32 fields).

import type { FlowData, LoadedBundle, Manifest, VertexData } from "./types";

export const VERTEX_STRIDE = 24;
export const FLOW_STRIDE = 20;
export const SUPPORTED_FORMAT = 1;

export class BundleLoadError extends Error {}

export function parseVertices(buf: ArrayBuffer, expected: number): VertexData {
  if (buf.byteLength !== expected * VERTEX_STRIDE) {
    throw new BundleLoadError(
      `vertices buffer is ${buf.byteLength} bytes, expected ${expected} x ${VERTEX_STRIDE}`,
    );
  }
  const view = new DataView(buf);
  const out: VertexData = {
    count: expected,
    x: new Float32Array(expected),
    y: new Float32Array(expected),
    z: new Float32Array(expected),
    width: new Float32Array(expected),
    group: new Uint8Array(expected),
    flowIndex: new Uint32Array(expected),
  };
  for (let i = 0; i < expected; i++) {
    const o = i * VERTEX_STRIDE;
    out.x[i] = view.getFloat32(o, true);
    out.y[i] = view.getFloat32(o + 4, true);
    out.z[i] = view.getFloat32(o + 8, true);
    out.width[i] = view.getFloat32(o + 12, true);
    out.group[i] = view.getUint8(o + 16);
    out.flowIndex[i] = view.getUint32(o + 20, true);
  }
  return out;
}

export function parseFlows(buf: ArrayBuffer, expected: number): FlowData {
  if (buf.byteLength !== expected * FLOW_STRIDE) {
    throw new BundleLoadError(
      `flows buffer is ${buf.byteLength} bytes, expected ${expected} x ${FLOW_STRIDE}`,
    );
  }
  const view = new DataView(buf);
  const out: FlowData = {
    count: expected,
    firstVertex: new Uint32Array(expected),
    vertexCount: new Uint32Array(expected),
    originCell: new Uint32Array(expected),
    destCell: new Uint32Array(expected),
    totalVisitors: new Uint32Array(expected),
  };
  for (let i = 0; i < expected; i++) {
    const o = i * FLOW_STRIDE;
    out.firstVertex[i] = view.getUint32(o, true);
    out.vertexCount[i] = view.getUint32(o + 4, true);
    out.originCell[i] = view.getUint32(o + 8, true);
    out.destCell[i] = view.getUint32(o + 12, true);
    out.totalVisitors[i] = view.getUint32(o + 16, true);
  }
  return out;
}

export function checkManifest(manifest: Manifest): void {
  if (manifest.format_version !== SUPPORTED_FORMAT) {
    throw new BundleLoadError(
      `bundle format ${manifest.format_version} not supported (viewer speaks ${SUPPORTED_FORMAT})`,
    );
  }
  if (!manifest.buffers?.vertices || !manifest.buffers?.flows) {
    throw new BundleLoadError("manifest names no buffers");
  }
  if (manifest.colors.length !== 4) {
    throw new BundleLoadError(`expected 4 group colors, got ${manifest.colors.length}`);
  }
}

/** Per-flow bitmask of the groups its vertices carry (bit g-1 for group g). */
export function flowGroupBits(vertices: VertexData, flows: FlowData): Uint8Array {
  const bits = new Uint8Array(flows.count);
  for (let f = 0; f < flows.count; f++) {
    const first = flows.firstVertex[f];
    const end = first + flows.vertexCount[f];
    let b = 0;
    for (let v = first; v < end; v++) b |= 1 << (vertices.group[v] - 1);
    bits[f] = b;
  }
  return bits;
}

async function fetchBinary(url: string, name: string): Promise<ArrayBuffer> {
  const resp = await fetch(url);
  if (!resp.ok) throw new BundleLoadError(`${name}: HTTP ${resp.status}`);
  return resp.arrayBuffer();
}

export async function loadBundle(baseUrl: string): Promise<LoadedBundle> {
  const resp = await fetch(`${baseUrl}/api/manifest`);
  if (!resp.ok) throw new BundleLoadError(`manifest: HTTP ${resp.status}`);
  const manifest = (await resp.json()) as Manifest;
  checkManifest(manifest);
  const [vbuf, fbuf] = await Promise.all([
    fetchBinary(`${baseUrl}/buffers/${manifest.buffers.vertices}`, manifest.buffers.vertices),
    fetchBinary(`${baseUrl}/buffers/${manifest.buffers.flows}`, manifest.buffers.flows),
  ]);
  return {
    manifest,
    vertices: parseVertices(vbuf, manifest.counts.vertices),
    flows: parseFlows(fbuf, manifest.counts.flows),
  };
}
