// Scene state: everything the render loop reads, mutated only through
// these helpers. The server's artifacts are never written back.

import type { FlowData } from "./types";

export interface SceneState {
  groupMask: number; // bits 0..3 for groups 1..4
  presetName: string;
  hoveredCell: number | null;
  cursor: number; // animation position, in steps (fractional)
}

export const FULL_MASK = 0b1111;

export function initialState(presetName: string): SceneState {
  return { groupMask: FULL_MASK, presetName, hoveredCell: null, cursor: 0 };
}

export function toggleGroup(state: SceneState, group: number): SceneState {
  const bit = 1 << (group - 1);
  const next = state.groupMask ^ bit;
  // an empty mask draws nothing but must stay representable
  return { ...state, groupMask: next };
}

export function maskHasGroup(mask: number, group: number): boolean {
  return (mask & (1 << (group - 1))) !== 0;
}

/** CPU mirror of the GPU-side filter: vertices drawn under a mask are the
 * full runs of every flow that carries at least one masked group. */
export function visibleVertexCount(flows: FlowData, flowGroupBits: Uint8Array,
                                   mask: number): number {
  let total = 0;
  for (let i = 0; i < flows.count; i++) {
    if ((flowGroupBits[i] & mask) !== 0) total += flows.vertexCount[i];
  }
  return total;
}

export function setCursor(state: SceneState, cursor: number, maxStep: number): SceneState {
  const clamped = Math.min(Math.max(cursor, 0), maxStep);
  return { ...state, cursor: clamped };
}

export function setHover(state: SceneState, cell: number | null): SceneState {
  return state.hoveredCell === cell ? state : { ...state, hoveredCell: cell };
}
