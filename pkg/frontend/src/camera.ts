// Orbit camera over a z-up world (ground plane at z = 0).

import { lookAt, multiply, perspective, type Mat4, type Vec3 } from "./mat";

export interface OrbitState {
  target: Vec3;
  azimuth: number; // radians, 0 looks along +x
  elevation: number; // radians above the ground plane
  distance: number;
}

const MIN_ELEVATION = 0.05;
const MAX_ELEVATION = Math.PI / 2 - 0.02;

export class OrbitCamera {
  state: OrbitState;
  fovY = Math.PI / 4;

  constructor(state: OrbitState) {
    this.state = { ...state, target: [...state.target] as Vec3 };
    this.clamp();
  }

  eye(): Vec3 {
    const { target, azimuth, elevation, distance } = this.state;
    const c = Math.cos(elevation) * distance;
    return [
      target[0] + c * Math.cos(azimuth),
      target[1] + c * Math.sin(azimuth),
      target[2] + Math.sin(elevation) * distance,
    ];
  }

  viewProjection(aspect: number): Mat4 {
    const near = Math.max(1, this.state.distance / 1000);
    const far = this.state.distance * 20;
    const proj = perspective(this.fovY, aspect, near, far);
    const view = lookAt(this.eye(), this.state.target, [0, 0, 1]);
    return multiply(proj, view);
  }

  rotate(dAzimuth: number, dElevation: number): void {
    this.state.azimuth += dAzimuth;
    this.state.elevation += dElevation;
    this.clamp();
  }

  zoom(factor: number): void {
    this.state.distance *= factor;
    this.clamp();
  }

  pan(dxWorld: number, dyWorld: number): void {
    // move the target in the ground plane, camera-relative
    const a = this.state.azimuth;
    const fx = -Math.cos(a), fy = -Math.sin(a); // toward the camera, flattened
    const rx = -fy, ry = fx;
    this.state.target[0] += rx * dxWorld + fx * dyWorld;
    this.state.target[1] += ry * dxWorld + fy * dyWorld;
  }

  private clamp(): void {
    this.state.elevation = Math.min(MAX_ELEVATION, Math.max(MIN_ELEVATION, this.state.elevation));
    this.state.distance = Math.max(10, this.state.distance);
  }
}

export function fitCamera(min: number[], max: number[]): OrbitCamera {
  const cx = (min[0] + max[0]) / 2;
  const cy = (min[1] + max[1]) / 2;
  const span = Math.max(max[0] - min[0], max[1] - min[1], 1000);
  return new OrbitCamera({
    target: [cx, cy, 0],
    azimuth: -Math.PI / 2,
    elevation: 0.6,
    distance: span * 1.2,
  });
}
