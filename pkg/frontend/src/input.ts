/**
 * Pointer-to-scene input mapping. A mouse has no z axis, so press depth is
 * driven by the scroll wheel: each notch presses MM_PER_NOTCH deeper below
 * the surface under the pointer (the mapping is shown on screen).
 */

import type { SceneInfo } from "./protocol.js";

export const MM_PER_NOTCH = 0.5;
export const HOVER_MM = 2.0;
export const MAX_DEPTH_MM = 10.0;

export interface Viewport {
  /** canvas pixel of scene origin (mm 0,0) */
  originPx: [number, number];
  pxPerMm: number;
}

export function pointerToMm(viewport: Viewport, px: number, py: number): [number, number] {
  return [
    (px - viewport.originPx[0]) / viewport.pxPerMm,
    (py - viewport.originPx[1]) / viewport.pxPerMm,
  ];
}

export function mmToPx(viewport: Viewport, x: number, y: number): [number, number] {
  return [
    viewport.originPx[0] + x * viewport.pxPerMm,
    viewport.originPx[1] + y * viewport.pxPerMm,
  ];
}

export interface DepthControl {
  depthMm: number;
}

export function wheelToDepth(control: DepthControl, deltaY: number): DepthControl {
  // wheel down (positive deltaY) presses deeper
  const notches = Math.sign(deltaY);
  const depthMm = Math.min(Math.max(control.depthMm + notches * MM_PER_NOTCH, 0), MAX_DEPTH_MM);
  return { depthMm };
}

export function surfaceHeightAt(scene: SceneInfo | null, x: number, y: number): number | null {
  if (!scene) return null;
  for (const mesh of scene.meshes) {
    const [ox, oy] = mesh.region.origin_mm;
    const [ex, ey] = mesh.region.extent_mm;
    if (x >= ox && x <= ox + ex && y >= oy && y <= oy + ey) {
      return mesh.region.height_mm;
    }
  }
  return null;
}

/**
 * z for the synthetic finger: hovering HOVER_MM above the surface at depth 0,
 * pressing below it once depth exceeds the hover gap. Off every region the
 * finger floats at a fixed height well above any surface.
 */
export function fingerZ(scene: SceneInfo | null, x: number, y: number, control: DepthControl): number {
  const height = surfaceHeightAt(scene, x, y);
  if (height === null) {
    return 1000.0;
  }
  return height + HOVER_MM - control.depthMm;
}
