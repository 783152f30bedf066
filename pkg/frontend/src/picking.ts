// Pointer picking: unproject the cursor to a ground-plane point, then map
// it to a grid cell. Cells are half-open squares, row-major ids.

import { invert, transformPoint, type Mat4, type Vec3 } from "./mat";
import type { GridInfo } from "./types";

export function cellOf(xM: number, yM: number, grid: GridInfo): number | null {
  const col = Math.floor((xM - grid.origin_x_m) / grid.cell_size_m);
  const row = Math.floor((yM - grid.origin_y_m) / grid.cell_size_m);
  if (col < 0 || col >= grid.n_cols || row < 0 || row >= grid.n_rows) return null;
  return row * grid.n_cols + col;
}

export function cellCenter(cell: number, grid: GridInfo): [number, number] {
  const row = Math.floor(cell / grid.n_cols);
  const col = cell % grid.n_cols;
  return [
    grid.origin_x_m + (col + 0.5) * grid.cell_size_m,
    grid.origin_y_m + (row + 0.5) * grid.cell_size_m,
  ];
}

/** Ray through NDC (x, y) intersected with the z = 0 plane; null when the
 * ray points away from the ground. */
export function groundPoint(ndcX: number, ndcY: number, viewProj: Mat4): [number, number] | null {
  const inv = invert(viewProj);
  if (!inv) return null;
  const near = transformPoint(inv, [ndcX, ndcY, -1]);
  const far = transformPoint(inv, [ndcX, ndcY, 1]);
  const a: Vec3 = [near[0] / near[3], near[1] / near[3], near[2] / near[3]];
  const b: Vec3 = [far[0] / far[3], far[1] / far[3], far[2] / far[3]];
  const dz = b[2] - a[2];
  if (Math.abs(dz) < 1e-12) return null;
  const t = -a[2] / dz;
  if (t < 0 || t > 1) return null;
  return [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
}

export function pickCell(ndcX: number, ndcY: number, viewProj: Mat4,
                         grid: GridInfo): number | null {
  const p = groundPoint(ndcX, ndcY, viewProj);
  return p ? cellOf(p[0], p[1], grid) : null;
}
