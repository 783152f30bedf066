// WebGL2 renderer: opaque ground with depth writes, then additive flow
// ribbons with depth test only, then visitor dots.

import { dropletTile } from "./droplet";
import type { Mat4 } from "./mat";
import { dotFrag, dotVert, flowFrag, flowVert, groundFrag, groundVert } from "./shaders";
import type { LoadedBundle } from "./types";

const FLOATS_PER_RIBBON_VERTEX = 10; // pos3 next3 width side group arc

export class RenderError extends Error {}

function compile(gl: WebGL2RenderingContext, type: number, src: string): WebGLShader {
  const sh = gl.createShader(type);
  if (!sh) throw new RenderError("createShader failed");
  gl.shaderSource(sh, src);
  gl.compileShader(sh);
  if (!gl.getShaderParameter(sh, gl.COMPILE_STATUS)) {
    throw new RenderError(`shader: ${gl.getShaderInfoLog(sh)}`);
  }
  return sh;
}

function link(gl: WebGL2RenderingContext, vs: string, fs: string): WebGLProgram {
  const prog = gl.createProgram();
  if (!prog) throw new RenderError("createProgram failed");
  gl.attachShader(prog, compile(gl, gl.VERTEX_SHADER, vs));
  gl.attachShader(prog, compile(gl, gl.FRAGMENT_SHADER, fs));
  gl.linkProgram(prog);
  if (!gl.getProgramParameter(prog, gl.LINK_STATUS)) {
    throw new RenderError(`link: ${gl.getProgramInfoLog(prog)}`);
  }
  return prog;
}

/** Expand per-flow centerlines into one stitched triangle strip.
 * Exported for tests; pure typed-array work. */
export function buildRibbonStrip(bundle: LoadedBundle): Float32Array {
  const { vertices: v, flows: f } = bundle;
  let stripVerts = 0;
  for (let i = 0; i < f.count; i++) stripVerts += f.vertexCount[i] * 2 + 2;
  const out = new Float32Array(stripVerts * FLOATS_PER_RIBBON_VERTEX);
  let w = 0;
  const put = (vi: number, nx: number, ny: number, nz: number, side: number, arc: number) => {
    out[w++] = v.x[vi]; out[w++] = v.y[vi]; out[w++] = v.z[vi];
    out[w++] = nx; out[w++] = ny; out[w++] = nz;
    out[w++] = v.width[vi]; out[w++] = side; out[w++] = v.group[vi]; out[w++] = arc;
  };
  for (let i = 0; i < f.count; i++) {
    const first = f.firstVertex[i];
    const n = f.vertexCount[i];
    let arc = 0;
    for (let k = 0; k < n; k++) {
      const vi = first + k;
      const hasNext = k < n - 1;
      const ni = hasNext ? vi + 1 : vi - 1;
      // the last vertex extrapolates its tangent so the strip keeps direction
      const nx = hasNext ? v.x[ni] : 2 * v.x[vi] - v.x[ni];
      const ny = hasNext ? v.y[ni] : 2 * v.y[vi] - v.y[ni];
      const nz = hasNext ? v.z[ni] : 2 * v.z[vi] - v.z[ni];
      if (k > 0) {
        arc += Math.hypot(v.x[vi] - v.x[vi - 1], v.y[vi] - v.y[vi - 1], v.z[vi] - v.z[vi - 1]);
      }
      const u = arc / Math.max(v.width[vi] * 6, 1); // droplet tiling scale
      if (k === 0) put(vi, nx, ny, nz, -1, u); // degenerate stitch entry
      put(vi, nx, ny, nz, -1, u);
      put(vi, nx, ny, nz, 1, u);
      if (k === n - 1) put(vi, nx, ny, nz, 1, u); // stitch exit
    }
  }
  return out;
}

export class Renderer {
  private gl: WebGL2RenderingContext;
  private flowProg: WebGLProgram;
  private groundProg: WebGLProgram;
  private dotProg: WebGLProgram;
  private flowVao: WebGLVertexArrayObject;
  private groundVao: WebGLVertexArrayObject;
  private dotVao: WebGLVertexArrayObject;
  private dotBuffer: WebGLBuffer;
  private stripVertexCount = 0;
  private colors: Float32Array;
  private dotCapacity = 0;

  constructor(private canvas: HTMLCanvasElement, bundle: LoadedBundle, dropletSeed = 7) {
    const gl = canvas.getContext("webgl2", { antialias: true });
    if (!gl) throw new RenderError("WebGL2 is not available");
    this.gl = gl;
    this.flowProg = link(gl, flowVert, flowFrag);
    this.groundProg = link(gl, groundVert, groundFrag);
    this.dotProg = link(gl, dotVert, dotFrag);
    this.colors = new Float32Array(
      bundle.manifest.colors.flatMap((c) => [c[0] / 255, c[1] / 255, c[2] / 255, c[3] / 255]),
    );

    // flow ribbons
    const strip = buildRibbonStrip(bundle);
    this.stripVertexCount = strip.length / FLOATS_PER_RIBBON_VERTEX;
    this.flowVao = gl.createVertexArray()!;
    gl.bindVertexArray(this.flowVao);
    const vbo = gl.createBuffer();
    gl.bindBuffer(gl.ARRAY_BUFFER, vbo);
    gl.bufferData(gl.ARRAY_BUFFER, strip, gl.STATIC_DRAW);
    const stride = FLOATS_PER_RIBBON_VERTEX * 4;
    const attrs: [string, number, number][] = [
      ["aPos", 3, 0], ["aNext", 3, 12], ["aWidth", 1, 24],
      ["aSide", 1, 28], ["aGroup", 1, 32], ["aArc", 1, 36],
    ];
    for (const [name, size, offset] of attrs) {
      const loc = gl.getAttribLocation(this.flowProg, name);
      if (loc < 0) continue;
      gl.enableVertexAttribArray(loc);
      gl.vertexAttribPointer(loc, size, gl.FLOAT, false, stride, offset);
    }

    // ground quad over the grid extent
    const g = bundle.manifest.grid;
    const x0 = g.origin_x_m, y0 = g.origin_y_m;
    const x1 = x0 + g.n_cols * g.cell_size_m, y1 = y0 + g.n_rows * g.cell_size_m;
    this.groundVao = gl.createVertexArray()!;
    gl.bindVertexArray(this.groundVao);
    const gbo = gl.createBuffer();
    gl.bindBuffer(gl.ARRAY_BUFFER, gbo);
    gl.bufferData(gl.ARRAY_BUFFER, new Float32Array([
      x0, y0, 0, x1, y0, 0, x0, y1, 0, x1, y1, 0,
    ]), gl.STATIC_DRAW);
    const gloc = gl.getAttribLocation(this.groundProg, "aPos");
    gl.enableVertexAttribArray(gloc);
    gl.vertexAttribPointer(gloc, 3, gl.FLOAT, false, 12, 0);

    // visitor dots, streamed every frame
    this.dotVao = gl.createVertexArray()!;
    gl.bindVertexArray(this.dotVao);
    this.dotBuffer = gl.createBuffer()!;
    gl.bindBuffer(gl.ARRAY_BUFFER, this.dotBuffer);
    const dloc = gl.getAttribLocation(this.dotProg, "aPos");
    gl.enableVertexAttribArray(dloc);
    gl.vertexAttribPointer(dloc, 3, gl.FLOAT, false, 16, 0);
    const dg = gl.getAttribLocation(this.dotProg, "aGroup");
    gl.enableVertexAttribArray(dg);
    gl.vertexAttribPointer(dg, 1, gl.FLOAT, false, 16, 12);
    gl.bindVertexArray(null);

    // droplet mask texture
    const size = 256;
    const tile = dropletTile(size, dropletSeed);
    const tex = gl.createTexture();
    gl.activeTexture(gl.TEXTURE0);
    gl.bindTexture(gl.TEXTURE_2D, tex);
    gl.pixelStorei(gl.UNPACK_ALIGNMENT, 1);
    gl.texImage2D(gl.TEXTURE_2D, 0, gl.R8, size, size, 0, gl.RED, gl.UNSIGNED_BYTE, tile);
    gl.texParameteri(gl.TEXTURE_2D, gl.TEXTURE_MIN_FILTER, gl.LINEAR);
    gl.texParameteri(gl.TEXTURE_2D, gl.TEXTURE_MAG_FILTER, gl.LINEAR);
    gl.texParameteri(gl.TEXTURE_2D, gl.TEXTURE_WRAP_S, gl.REPEAT);
    gl.texParameteri(gl.TEXTURE_2D, gl.TEXTURE_WRAP_T, gl.REPEAT);

    gl.clearColor(0.02, 0.02, 0.05, 1.0);
    gl.enable(gl.DEPTH_TEST);
  }

  draw(viewProj: Mat4, groupMask: number, dots: Float32Array, dotCount: number): void {
    const gl = this.gl;
    const w = this.canvas.width, h = this.canvas.height;
    gl.viewport(0, 0, w, h);
    gl.clear(gl.COLOR_BUFFER_BIT | gl.DEPTH_BUFFER_BIT);

    // ground: opaque, writes depth
    gl.useProgram(this.groundProg);
    gl.depthMask(true);
    gl.disable(gl.BLEND);
    gl.uniformMatrix4fv(gl.getUniformLocation(this.groundProg, "uViewProj"), false, viewProj);
    gl.uniform4f(gl.getUniformLocation(this.groundProg, "uColor"), 0.05, 0.05, 0.09, 1);
    gl.bindVertexArray(this.groundVao);
    gl.drawArrays(gl.TRIANGLE_STRIP, 0, 4);

    // flows: additive over the ground, no depth writes
    gl.useProgram(this.flowProg);
    gl.enable(gl.BLEND);
    gl.blendFunc(gl.SRC_ALPHA, gl.ONE);
    gl.depthMask(false);
    gl.uniformMatrix4fv(gl.getUniformLocation(this.flowProg, "uViewProj"), false, viewProj);
    gl.uniform2f(gl.getUniformLocation(this.flowProg, "uViewport"), w / 2, h / 2);
    gl.uniform4fv(gl.getUniformLocation(this.flowProg, "uColors"), this.colors);
    gl.uniform1i(gl.getUniformLocation(this.flowProg, "uGroupMask"), groupMask);
    gl.uniform1i(gl.getUniformLocation(this.flowProg, "uDroplets"), 0);
    gl.uniform1f(gl.getUniformLocation(this.flowProg, "uAlpha"), 0.55);
    gl.bindVertexArray(this.flowVao);
    gl.drawArrays(gl.TRIANGLE_STRIP, 0, this.stripVertexCount);

    // visitor dots
    if (dotCount > 0) {
      gl.useProgram(this.dotProg);
      gl.bindVertexArray(this.dotVao);
      gl.bindBuffer(gl.ARRAY_BUFFER, this.dotBuffer);
      if (dotCount > this.dotCapacity) {
        gl.bufferData(gl.ARRAY_BUFFER, dots, gl.DYNAMIC_DRAW);
        this.dotCapacity = dotCount;
      } else {
        gl.bufferSubData(gl.ARRAY_BUFFER, 0, dots.subarray(0, dotCount * 4));
      }
      gl.uniformMatrix4fv(gl.getUniformLocation(this.dotProg, "uViewProj"), false, viewProj);
      gl.uniform4fv(gl.getUniformLocation(this.dotProg, "uColors"), this.colors);
      gl.uniform1f(gl.getUniformLocation(this.dotProg, "uPointSize"), 5.0);
      gl.drawArrays(gl.POINTS, 0, dotCount);
    }
    gl.depthMask(true);
    gl.bindVertexArray(null);
  }
}
