/** Viewport rectangles, window query building, and zoom/pan arithmetic.
 *
 * Windowing itself happens server-side; this module only builds queries and
 * checks responses. Bounds are closed on both sides, matching the service.
 */
import type { OrbitProjection } from './api.js';

export interface Rect {
  xlo: number;
  xhi: number;
  ylo: number;
  yhi: number;
}

export function isValidRect(rect: Rect): boolean {
  return (
    Number.isFinite(rect.xlo) && Number.isFinite(rect.xhi) &&
    Number.isFinite(rect.ylo) && Number.isFinite(rect.yhi) &&
    rect.xlo <= rect.xhi && rect.ylo <= rect.yhi
  );
}

/** Serialize a window rectangle in the service's lo..hi,lo..hi form. */
export function windowParam(rect: Rect): string {
  if (!isValidRect(rect)) {
    throw new Error('window bounds must be finite with lo <= hi');
  }
  return `${rect.xlo}..${rect.xhi},${rect.ylo}..${rect.yhi}`;
}

export function trajectoriesQuery(
  vars: [string, string],
  window?: Rect,
  decimate?: number,
): string {
  if (vars[0] === vars[1]) {
    throw new Error('projection axes must be distinct variables');
  }
  const params = new URLSearchParams();
  params.set('vars', `${vars[0]},${vars[1]}`);
  if (window !== undefined) params.set('window', windowParam(window));
  if (decimate !== undefined) {
    if (!Number.isInteger(decimate) || decimate < 1) {
      throw new Error('decimate must be a positive integer');
    }
    params.set('decimate', String(decimate));
  }
  return params.toString();
}

export function pointInWindow(point: [number, number], rect: Rect): boolean {
  return (
    point[0] >= rect.xlo && point[0] <= rect.xhi &&
    point[1] >= rect.ylo && point[1] <= rect.yhi
  );
}

/** Smallest rectangle containing every projected sample, or null if empty. */
export function dataExtents(orbits: OrbitProjection[]): Rect | null {
  let rect: Rect | null = null;
  for (const orbit of orbits) {
    for (const [x, y] of orbit.points) {
      if (rect === null) {
        rect = { xlo: x, xhi: x, ylo: y, yhi: y };
      } else {
        if (x < rect.xlo) rect.xlo = x;
        if (x > rect.xhi) rect.xhi = x;
        if (y < rect.ylo) rect.ylo = y;
        if (y > rect.yhi) rect.yhi = y;
      }
    }
  }
  return rect;
}

/** Pad a degenerate extent so it is usable as a viewport. */
export function padDegenerate(rect: Rect, pad = 0.5): Rect {
  const out = { ...rect };
  if (out.xlo === out.xhi) {
    out.xlo -= pad;
    out.xhi += pad;
  }
  if (out.ylo === out.yhi) {
    out.ylo -= pad;
    out.yhi += pad;
  }
  return out;
}

/** Scale the rectangle about a fixed point; factor < 1 zooms in. */
export function zoomRect(rect: Rect, factor: number, center: [number, number]): Rect {
  if (!(factor > 0) || !Number.isFinite(factor)) {
    throw new Error('zoom factor must be a positive finite number');
  }
  const [cx, cy] = center;
  return {
    xlo: cx + (rect.xlo - cx) * factor,
    xhi: cx + (rect.xhi - cx) * factor,
    ylo: cy + (rect.ylo - cy) * factor,
    yhi: cy + (rect.yhi - cy) * factor,
  };
}

export function panRect(rect: Rect, dx: number, dy: number): Rect {
  return { xlo: rect.xlo + dx, xhi: rect.xhi + dx, ylo: rect.ylo + dy, yhi: rect.yhi + dy };
}

/** Keep the viewport inside finite bounds derived from the data extents,
 * preserving its size where possible. */
export function clampRect(rect: Rect, bounds: Rect): Rect {
  const width = Math.min(rect.xhi - rect.xlo, bounds.xhi - bounds.xlo);
  const height = Math.min(rect.yhi - rect.ylo, bounds.yhi - bounds.ylo);
  let xlo = Math.max(rect.xlo, bounds.xlo);
  let ylo = Math.max(rect.ylo, bounds.ylo);
  if (xlo + width > bounds.xhi) xlo = bounds.xhi - width;
  if (ylo + height > bounds.yhi) ylo = bounds.yhi - height;
  return { xlo, xhi: xlo + width, ylo, yhi: ylo + height };
}
