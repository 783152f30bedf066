// Procedural droplet alpha mask: seeded soft discs scattered over a tile
// until the target coverage is reached. Deterministic for a given seed, so
// identical scene state renders identical frames.

export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a |= 0;
    a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function dropletTile(size: number, seed: number, coverage = 0.4): Uint8Array {
  const data = new Uint8Array(size * size);
  const rand = mulberry32(seed);
  const target = coverage * size * size * 255;
  let sum = 0;
  let guard = 0;
  while (sum < target && guard++ < 10_000) {
    const cx = rand() * size;
    const cy = rand() * size;
    const r = (0.02 + 0.05 * rand()) * size;
    const lo = Math.max(0, Math.floor(cy - r)), hi = Math.min(size - 1, Math.ceil(cy + r));
    for (let y = lo; y <= hi; y++) {
      for (let x = Math.max(0, Math.floor(cx - r)); x <= Math.min(size - 1, Math.ceil(cx + r)); x++) {
        // wrap-around distance keeps the tile seamless
        const dx = Math.min(Math.abs(x - cx), size - Math.abs(x - cx));
        const dy = Math.min(Math.abs(y - cy), size - Math.abs(y - cy));
        const d = Math.hypot(dx, dy) / r;
        if (d >= 1) continue;
        const soft = Math.round(255 * Math.min(1, 1.6 * (1 - d)));
        const i = y * size + x;
        const before = data[i];
        data[i] = Math.max(before, soft);
        sum += data[i] - before;
      }
    }
  }
  return data;
}

export function coverageOf(tile: Uint8Array): number {
  let s = 0;
  for (let i = 0; i < tile.length; i++) s += tile[i];
  return s / (tile.length * 255);
}
