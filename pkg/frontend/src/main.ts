// Viewer bootstrap: load the bundle, wire camera + UI, run the render loop.

import { buildTracks, dominantGroup, dotPosition, parseFrames, type AgentTrack } from "./animate";
import { BundleLoadError, flowGroupBits, loadBundle } from "./bundle";
import { fitCamera } from "./camera";
import { drawDisc } from "./disc";
import { pickCell } from "./picking";
import { Renderer } from "./render";
import { FULL_MASK, initialState, maskHasGroup, setCursor, setHover, toggleGroup,
         visibleVertexCount, type SceneState } from "./scene";
import type { CellInfo, DiscData, LoadedBundle } from "./types";

const BASE = "";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function showError(message: string): void {
  const box = el<HTMLDivElement>("error");
  box.textContent = message;
  box.style.display = "block";
}

async function fetchCell(id: number): Promise<CellInfo | null> {
  const resp = await fetch(`${BASE}/api/cell/${id}`);
  return resp.ok ? ((await resp.json()) as CellInfo) : null;
}

async function boot(): Promise<void> {
  let bundle: LoadedBundle;
  try {
    bundle = await loadBundle(BASE);
  } catch (e) {
    showError(e instanceof BundleLoadError ? `bundle load failed: ${e.message}` : String(e));
    return;
  }
  const canvas = el<HTMLCanvasElement>("scene");
  const renderer = new Renderer(canvas, bundle, bundle.manifest.params.seed ?? 7);
  const camera = fitCamera(bundle.manifest.bounds.min, bundle.manifest.bounds.max);
  const groupBits = flowGroupBits(bundle.vertices, bundle.flows);
  let state: SceneState = initialState(bundle.manifest.preset.name);

  el<HTMLSpanElement>("preset").textContent = bundle.manifest.preset.name;
  el<HTMLSpanElement>("counts").textContent =
    `${bundle.flows.count.toLocaleString()} flows, ${bundle.vertices.count.toLocaleString()} vertices`;

  // per-cell heights for the animation curves
  const heightByCell = new Map<number, number>();
  try {
    const cells = (await (await fetch(`${BASE}/api/cells`)).json()) as
      { cell_id: number; height_m: number }[];
    for (const c of cells) heightByCell.set(c.cell_id, c.height_m);
  } catch {
    /* stats are optional for rendering */
  }

  // frames stream (optional)
  let tracks: AgentTrack[] = [];
  let maxStep = 0;
  let trackGroup: Uint8Array | null = null;
  try {
    const resp = await fetch(`${BASE}/api/frames`);
    if (resp.ok) {
      const built = buildTracks(parseFrames(await resp.text()));
      tracks = built.tracks;
      maxStep = built.maxStep;
      // dominant group per agent, via its home->dest flow when compiled
      const flowByPair = new Map<string, number>();
      for (let i = 0; i < bundle.flows.count; i++) {
        flowByPair.set(`${bundle.flows.originCell[i]}:${bundle.flows.destCell[i]}`, i);
      }
      trackGroup = new Uint8Array(tracks.length);
      tracks.forEach((t, i) => {
        const first = t.trips.find((x) => x !== undefined);
        const fi = first === undefined ? undefined : flowByPair.get(`${t.home}:${first}`);
        if (fi === undefined) {
          trackGroup![i] = 1;
        } else {
          const a = bundle.flows.firstVertex[fi];
          const b = a + bundle.flows.vertexCount[fi];
          trackGroup![i] = dominantGroup(bundle.vertices.group.subarray(a, b));
        }
      });
    }
  } catch {
    /* no frames -> animation control disabled */
  }
  const scrub = el<HTMLInputElement>("scrub");
  scrub.max = String(maxStep);
  scrub.disabled = maxStep === 0;

  // group-mask toggles, colored from the manifest
  const maskBox = el<HTMLDivElement>("mask");
  for (let g = 1; g <= 4; g++) {
    const [r, gg, b] = bundle.manifest.colors[g - 1];
    const lab = document.createElement("label");
    const cb = document.createElement("input");
    cb.type = "checkbox";
    cb.checked = true;
    cb.onchange = () => {
      state = toggleGroup(state, g);
      el<HTMLSpanElement>("visible").textContent =
        visibleVertexCount(bundle.flows, groupBits, state.groupMask).toLocaleString();
    };
    const chip = document.createElement("span");
    chip.className = "chip";
    chip.style.background = `rgb(${r},${gg},${b})`;
    lab.append(cb, chip, `${g}`);
    maskBox.append(lab);
  }
  el<HTMLSpanElement>("visible").textContent =
    visibleVertexCount(bundle.flows, groupBits, FULL_MASK).toLocaleString();

  // pointer: orbit on drag (dragging also advances the playback cursor),
  // hover picking when still
  let dragging = false;
  let panning = false;
  let lastX = 0, lastY = 0;
  let hoverTimer = 0;
  canvas.addEventListener("pointerdown", (e) => {
    dragging = true;
    panning = e.shiftKey || e.button === 2;
    lastX = e.clientX;
    lastY = e.clientY;
    canvas.setPointerCapture(e.pointerId);
  });
  canvas.addEventListener("pointerup", () => (dragging = false));
  canvas.addEventListener("contextmenu", (e) => e.preventDefault());
  canvas.addEventListener("wheel", (e) => {
    e.preventDefault();
    camera.zoom(Math.exp(e.deltaY * 0.001));
  }, { passive: false });

  canvas.addEventListener("pointermove", (e) => {
    if (dragging) {
      const dx = e.clientX - lastX;
      const dy = e.clientY - lastY;
      lastX = e.clientX;
      lastY = e.clientY;
      if (panning) {
        const scale = camera.state.distance / canvas.clientHeight;
        camera.pan(-dx * scale, dy * scale);
      } else {
        camera.rotate(-dx * 0.005, dy * 0.005);
        if (maxStep > 0) {
          state = setCursor(state, state.cursor + Math.abs(dx) * 0.01, maxStep);
          scrub.value = String(state.cursor);
        }
      }
      return;
    }
    window.clearTimeout(hoverTimer);
    hoverTimer = window.setTimeout(async () => {
      const rect = canvas.getBoundingClientRect();
      const ndcX = ((e.clientX - rect.left) / rect.width) * 2 - 1;
      const ndcY = 1 - ((e.clientY - rect.top) / rect.height) * 2;
      const vp = camera.viewProjection(canvas.width / canvas.height);
      const cell = pickCell(ndcX, ndcY, vp, bundle.manifest.grid);
      state = setHover(state, cell);
      const panel = el<HTMLPreElement>("panel");
      if (cell === null) {
        panel.style.display = "none";
        return;
      }
      const info = await fetchCell(cell);
      if (info && state.hoveredCell === cell) {
        panel.textContent = info.panel; // verbatim server text
        panel.style.display = "block";
      } else {
        panel.style.display = "none";
      }
    }, 60);
  });

  scrub.addEventListener("input", () => {
    state = setCursor(state, Number(scrub.value), maxStep);
  });

  // disc overlay on click
  const discCanvas = el<HTMLCanvasElement>("disc");
  let discRadius = 50;
  let discCell: number | null = null;
  async function refreshDisc(): Promise<void> {
    if (discCell === null) return;
    const resp = await fetch(`${BASE}/api/disc/${discCell}?radius_km=${discRadius}`);
    if (!resp.ok) {
      discCanvas.style.display = "none";
      return;
    }
    const disc = (await resp.json()) as DiscData;
    const info = await fetchCell(discCell);
    drawDisc(discCanvas, disc, bundle.manifest.colors, info ? info.panel : `No. ${discCell}`);
    discCanvas.style.display = "block";
  }
  canvas.addEventListener("dblclick", async (e) => {
    const rect = canvas.getBoundingClientRect();
    const ndcX = ((e.clientX - rect.left) / rect.width) * 2 - 1;
    const ndcY = 1 - ((e.clientY - rect.top) / rect.height) * 2;
    const vp = camera.viewProjection(canvas.width / canvas.height);
    discCell = pickCell(ndcX, ndcY, vp, bundle.manifest.grid);
    await refreshDisc();
  });
  el<HTMLButtonElement>("radius").addEventListener("click", async (e) => {
    discRadius = discRadius === 50 ? 100 : 50;
    (e.target as HTMLButtonElement).textContent = `radius ${discRadius} km`;
    await refreshDisc();
  });
  discCanvas.addEventListener("dblclick", () => (discCanvas.style.display = "none"));

  // render loop with an fps meter
  const dots = new Float32Array(Math.max(tracks.length, 1) * 4);
  let frames = 0;
  let lastFps = performance.now();
  const fpsEl = el<HTMLSpanElement>("fps");

  function frame(): void {
    const dpr = window.devicePixelRatio || 1;
    const wCss = canvas.clientWidth, hCss = canvas.clientHeight;
    if (canvas.width !== wCss * dpr || canvas.height !== hCss * dpr) {
      canvas.width = wCss * dpr;
      canvas.height = hCss * dpr;
    }
    let n = 0;
    for (let i = 0; i < tracks.length; i++) {
      const [x, y, z] = dotPosition(tracks[i], state.cursor, bundle.manifest.grid,
                                    (c) => heightByCell.get(c) ?? 0);
      const g = trackGroup ? trackGroup[i] : 1;
      if (!maskHasGroup(state.groupMask, g)) continue;
      dots[n * 4] = x; dots[n * 4 + 1] = y; dots[n * 4 + 2] = z; dots[n * 4 + 3] = g;
      n++;
    }
    renderer.draw(camera.viewProjection(canvas.width / canvas.height), state.groupMask, dots, n);
    frames++;
    const now = performance.now();
    if (now - lastFps > 1000) {
      fpsEl.textContent = `${Math.round((frames * 1000) / (now - lastFps))} fps`;
      frames = 0;
      lastFps = now;
    }
    requestAnimationFrame(frame);
  }
  requestAnimationFrame(frame);
}

boot();
