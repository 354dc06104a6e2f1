// World <-> screen transform and the zoom-to-cluster-count schedule.

import type { Point2 } from "./types.js";

export const MAX_ZOOM = 8;
const BASE_SCALE = 40; // pixels per world unit at zoom 0
const ZOOM_SCALE_STEP = 1.35;

export interface Viewport {
  width: number;
  height: number;
}

export class Camera {
  constructor(
    public center: Point2 = [0, 0],
    public zoom = 0,
  ) {}

  scale(): number {
    return BASE_SCALE * ZOOM_SCALE_STEP ** this.zoom;
  }

  worldToScreen(point: Point2, viewport: Viewport): Point2 {
    const s = this.scale();
    return [
      viewport.width / 2 + (point[0] - this.center[0]) * s,
      viewport.height / 2 - (point[1] - this.center[1]) * s,
    ];
  }

  screenToWorld(point: Point2, viewport: Viewport): Point2 {
    const s = this.scale();
    return [
      this.center[0] + (point[0] - viewport.width / 2) / s,
      this.center[1] - (point[1] - viewport.height / 2) / s,
    ];
  }
}

/**
 * Server zoom schedule: zoom 0 shows one cluster, maxZoom shows n singleton
 * clusters, exponential in between. Must match the engine's documented
 * formula so cuts requested per zoom level nest.
 */
export function zoomToTargetClusters(zoom: number, maxZoom: number, n: number): number {
  if (n < 1) return 0;
  if (maxZoom <= 0) return 1;
  const raw = Math.round(n ** (zoom / maxZoom));
  return Math.max(1, Math.min(n, raw));
}
