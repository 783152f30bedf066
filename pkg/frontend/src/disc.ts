// Disc overlay: a 2D canvas rendering of one destination's visitors,
// radius = normalized distance to the destination, color = frequency group.

import type { DiscData } from "./types";

export function drawDisc(canvas: HTMLCanvasElement, disc: DiscData,
                         colors: number[][], label: string): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const w = canvas.width, h = canvas.height;
  const cx = w / 2, cy = h / 2;
  const R = Math.min(w, h) / 2 - 28;
  ctx.clearRect(0, 0, w, h);
  ctx.fillStyle = "rgba(8, 8, 16, 0.92)";
  ctx.fillRect(0, 0, w, h);

  ctx.strokeStyle = "rgba(255,255,255,0.25)";
  ctx.lineWidth = 1;
  ctx.beginPath();
  ctx.arc(cx, cy, R, 0, Math.PI * 2);
  ctx.stroke();

  for (const d of disc.dots) {
    const r = d.radial * R;
    // screen y grows downward; world angles are counter-clockwise from east
    const x = cx + r * Math.cos(d.angle);
    const y = cy - r * Math.sin(d.angle);
    const c = colors[d.group - 1] ?? [255, 255, 255, 255];
    ctx.fillStyle = `rgba(${c[0]},${c[1]},${c[2]},0.85)`;
    ctx.beginPath();
    ctx.arc(x, y, 2.1, 0, Math.PI * 2);
    ctx.fill();
  }

  ctx.fillStyle = "#ddd";
  ctx.font = "12px system-ui, sans-serif";
  if (disc.dots.length === 0) {
    ctx.textAlign = "center";
    ctx.fillText("no visitors", cx, cy);
    ctx.textAlign = "start";
  }
  const lines = label.split("\n");
  lines.forEach((line, i) => ctx.fillText(line, 10, h - 10 - (lines.length - 1 - i) * 16));
  ctx.fillText(`radius: ${disc.radius_km} km`, 10, 16);
}
