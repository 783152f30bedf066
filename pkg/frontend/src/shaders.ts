// GLSL for the three draw passes: ground plane, flow ribbons, visitor dots.

export const groundVert = `#version 300 es
uniform mat4 uViewProj;
in vec3 aPos;
void main() {
  gl_Position = uViewProj * vec4(aPos, 1.0);
}`;

export const groundFrag = `#version 300 es
precision mediump float;
uniform vec4 uColor;
out vec4 outColor;
void main() {
  outColor = uColor;
}`;

// Ribbons: each centerline vertex appears twice (side -1/+1) and is pushed
// apart in screen space by its world width, with a 1 px floor so thin
// distant flows stay readable. Group filtering discards fragments.
export const flowVert = `#version 300 es
uniform mat4 uViewProj;
uniform vec2 uViewport;
in vec3 aPos;
in vec3 aNext;
in float aWidth;
in float aSide;
in float aGroup;
in float aArc;
out float vGroup;
out vec2 vMask;
void main() {
  vec4 clip = uViewProj * vec4(aPos, 1.0);
  vec4 clipNext = uViewProj * vec4(aNext, 1.0);
  vec2 sHere = clip.xy / clip.w * uViewport;
  vec2 sNext = clipNext.xy / clipNext.w * uViewport;
  vec2 dir = sNext - sHere;
  float len = length(dir);
  dir = len > 1e-6 ? dir / len : vec2(1.0, 0.0);
  vec2 perp = vec2(-dir.y, dir.x);
  // world width -> pixels at this depth; proj[1][1] = focal scale
  float widthPx = aWidth * uViewProj[1][1] * uViewport.y / max(clip.w, 1e-3);
  widthPx = max(widthPx, 1.0);
  vec2 offsetPx = perp * (0.5 * widthPx * aSide);
  clip.xy += offsetPx / uViewport * clip.w;
  gl_Position = clip;
  vGroup = aGroup;
  vMask = vec2(aArc, aSide * 0.5 + 0.5);
}`;

export const flowFrag = `#version 300 es
precision mediump float;
uniform vec4 uColors[4];
uniform int uGroupMask;
uniform sampler2D uDroplets;
uniform float uAlpha;
in float vGroup;
in vec2 vMask;
out vec4 outColor;
void main() {
  int g = int(vGroup + 0.5);
  if ((uGroupMask & (1 << (g - 1))) == 0) discard;
  float droplet = texture(uDroplets, vMask).r;
  if (droplet < 0.12) discard;
  vec4 c = uColors[g - 1];
  outColor = vec4(c.rgb, c.a * droplet * uAlpha);
}`;

export const dotVert = `#version 300 es
uniform mat4 uViewProj;
uniform float uPointSize;
in vec3 aPos;
in float aGroup;
out float vGroup;
void main() {
  gl_Position = uViewProj * vec4(aPos, 1.0);
  gl_PointSize = uPointSize;
  vGroup = aGroup;
}`;

export const dotFrag = `#version 300 es
precision mediump float;
uniform vec4 uColors[4];
in float vGroup;
out vec4 outColor;
void main() {
  vec2 d = gl_PointCoord - vec2(0.5);
  if (dot(d, d) > 0.25) discard;
  int g = int(vGroup + 0.5);
  outColor = vec4(uColors[g - 1].rgb, 1.0);
}`;
