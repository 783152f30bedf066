// Visitor playback: frames stream parsing and dot kinematics.
//
// A step-0 record per agent marks its home. Each later event is one
// home -> place -> home trip; within a step the dot rides the same cubic
// the compiler uses (straight plan view, z = h t^2 (3 - 2t)), out on the
// first half of the step and back on the second.

import { cellCenter } from "./picking";
import type { FrameEvent, GridInfo } from "./types";

export interface AgentTrack {
  agent: string;
  home: number;
  trips: number[]; // destination cell per step, index 0 = step 1
}

export function parseFrames(ndjson: string): FrameEvent[] {
  const events: FrameEvent[] = [];
  for (const line of ndjson.split("\n")) {
    if (!line.trim()) continue;
    const d = JSON.parse(line) as { step: number; agent: string; to: number };
    events.push({ step: d.step, agent: d.agent, to: d.to });
  }
  return events;
}

export function buildTracks(events: FrameEvent[]): { tracks: AgentTrack[]; maxStep: number } {
  const byAgent = new Map<string, AgentTrack>();
  let maxStep = 0;
  for (const e of events) {
    let t = byAgent.get(e.agent);
    if (!t) {
      t = { agent: e.agent, home: -1, trips: [] };
      byAgent.set(e.agent, t);
    }
    if (e.step === 0) {
      t.home = e.to;
    } else {
      t.trips[e.step - 1] = e.to;
      maxStep = Math.max(maxStep, e.step);
    }
  }
  // tolerate streams without a home preamble: anchor at the first trip
  for (const t of byAgent.values()) {
    if (t.home < 0) t.home = t.trips.find((x) => x !== undefined) ?? 0;
  }
  return { tracks: [...byAgent.values()], maxStep };
}

export function curveZ(height: number, t: number): number {
  return height * t * t * (3 - 2 * t);
}

/** Dot position at a fractional cursor (in steps). Phase 0..0.5 of each
 * step travels home -> destination; 0.5..1 returns. */
export function dotPosition(track: AgentTrack, cursor: number, grid: GridInfo,
                            heightOfCell: (cell: number) => number): [number, number, number] {
  const [hx, hy] = cellCenter(track.home, grid);
  if (cursor <= 0 || track.trips.length === 0) return [hx, hy, 0];
  const step = Math.min(Math.ceil(cursor), track.trips.length);
  const dest = track.trips[step - 1];
  if (dest === undefined || dest === track.home) return [hx, hy, 0];
  const phase = cursor - (step - 1);
  const t = phase <= 0.5 ? phase * 2 : 2 - phase * 2;
  const [dx, dy] = cellCenter(dest, grid);
  const h = heightOfCell(dest);
  return [hx + (dx - hx) * t, hy + (dy - hy) * t, curveZ(h, t)];
}

/** Dot color follows the flow's dominant frequency group; group 1 when the
 * flow was not compiled into the bundle. */
export function dominantGroup(groupsOfFlow: Uint8Array | null): number {
  if (!groupsOfFlow || groupsOfFlow.length === 0) return 1;
  const counts = [0, 0, 0, 0, 0];
  for (const g of groupsOfFlow) counts[g]++;
  let best = 1;
  for (let g = 2; g <= 4; g++) if (counts[g] > counts[best]) best = g;
  return best;
}
