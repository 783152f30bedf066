import { describe, expect, it } from "vitest";

import { BundleLoadError, checkManifest, FLOW_STRIDE, flowGroupBits,
         parseFlows, parseVertices, VERTEX_STRIDE } from "../src/bundle";
import type { Manifest } from "../src/types";

function packVertices(rows: [number, number, number, number, number, number][]): ArrayBuffer {
  // rows: x, y, z, width, group, flow_index
  const buf = new ArrayBuffer(rows.length * VERTEX_STRIDE);
  const view = new DataView(buf);
  rows.forEach(([x, y, z, w, g, fi], i) => {
    const o = i * VERTEX_STRIDE;
    view.setFloat32(o, x, true);
    view.setFloat32(o + 4, y, true);
    view.setFloat32(o + 8, z, true);
    view.setFloat32(o + 12, w, true);
    view.setUint8(o + 16, g);
    view.setUint8(o + 17, 0);
    view.setUint16(o + 18, 0, true);
    view.setUint32(o + 20, fi, true);
  });
  return buf;
}

function packFlows(rows: [number, number, number, number, number][]): ArrayBuffer {
  const buf = new ArrayBuffer(rows.length * FLOW_STRIDE);
  const view = new DataView(buf);
  rows.forEach((r, i) => {
    r.forEach((v, k) => view.setUint32(i * FLOW_STRIDE + k * 4, v, true));
  });
  return buf;
}

describe("vertex records", () => {
  it("parses the 24-byte little-endian layout", () => {
    const v = parseVertices(packVertices([
      [1.5, -2.5, 30.25, 12.0, 3, 7],
      [0, 0, 0, 1, 1, 8],
    ]), 2);
    expect(v.count).toBe(2);
    expect(v.x[0]).toBe(1.5);
    expect(v.y[0]).toBe(-2.5);
    expect(v.z[0]).toBe(30.25);
    expect(v.width[0]).toBe(12);
    expect(v.group[0]).toBe(3);
    expect(v.flowIndex[0]).toBe(7);
    expect(v.group[1]).toBe(1);
  });

  it("rejects truncated buffers", () => {
    const buf = packVertices([[0, 0, 0, 1, 1, 0]]).slice(0, 20);
    expect(() => parseVertices(buf, 1)).toThrow(BundleLoadError);
  });

  it("rejects a count mismatch", () => {
    expect(() => parseVertices(packVertices([[0, 0, 0, 1, 1, 0]]), 2)).toThrow(/expected 2/);
  });
});

describe("flow records", () => {
  it("parses the 20-byte layout", () => {
    const f = parseFlows(packFlows([[0, 32, 100, 200, 55]]), 1);
    expect(f.firstVertex[0]).toBe(0);
    expect(f.vertexCount[0]).toBe(32);
    expect(f.originCell[0]).toBe(100);
    expect(f.destCell[0]).toBe(200);
    expect(f.totalVisitors[0]).toBe(55);
  });

  it("rejects wrong sizes", () => {
    expect(() => parseFlows(new ArrayBuffer(19), 1)).toThrow(BundleLoadError);
  });
});

describe("manifest checks", () => {
  const manifest = {
    format_version: 1,
    colors: [[0, 0, 139, 255], [173, 216, 230, 255], [255, 127, 80, 255], [255, 20, 147, 255]],
    buffers: { vertices: "vertices.bin", flows: "flows.bin" },
  } as unknown as Manifest;

  it("accepts the supported version", () => {
    expect(() => checkManifest(manifest)).not.toThrow();
  });

  it("rejects version mismatches", () => {
    expect(() => checkManifest({ ...manifest, format_version: 99 })).toThrow(/format 99/);
  });
});

describe("flow group bits", () => {
  it("collects each flow's groups", () => {
    const v = parseVertices(packVertices([
      [0, 0, 0, 1, 1, 0], [1, 0, 1, 1, 4, 0],
      [0, 0, 0, 1, 2, 1], [1, 0, 1, 1, 2, 1],
    ]), 4);
    const f = parseFlows(packFlows([[0, 2, 1, 2, 5], [2, 2, 3, 4, 5]]), 2);
    const bits = flowGroupBits(v, f);
    expect(bits[0]).toBe(0b1001);
    expect(bits[1]).toBe(0b0010);
  });
});
