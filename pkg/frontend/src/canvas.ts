/** Canvas rendering: viewport-to-pixel transforms and orbit drawing. */
import type { OrbitProjection } from './api.js';
import { CLASS_COLORS } from './viewstate.js';
import type { Rect } from './window.js';

export interface Transform {
  toPxX(v: number): number;
  toPxY(v: number): number;
  toDataX(px: number): number;
  toDataY(px: number): number;
}

export function makeTransform(view: Rect, width: number, height: number, margin = 10): Transform {
  const spanX = view.xhi - view.xlo || 1;
  const spanY = view.yhi - view.ylo || 1;
  const innerW = width - 2 * margin;
  const innerH = height - 2 * margin;
  return {
    toPxX: (v) => margin + ((v - view.xlo) / spanX) * innerW,
    toPxY: (v) => height - margin - ((v - view.ylo) / spanY) * innerH,
    toDataX: (px) => view.xlo + ((px - margin) / innerW) * spanX,
    toDataY: (px) => view.ylo + ((height - margin - px) / innerH) * spanY,
  };
}

interface Ctx2D {
  clearRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  stroke(): void;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  strokeRect(x: number, y: number, w: number, h: number): void;
  setLineDash(segments: number[]): void;
}

export function drawOrbits(
  ctx: Ctx2D,
  orbits: OrbitProjection[],
  tf: Transform,
  width: number,
  height: number,
): void {
  ctx.clearRect(0, 0, width, height);
  ctx.lineWidth = 0.8;
  for (const orbit of orbits) {
    if (orbit.points.length === 0) continue;
    ctx.strokeStyle = CLASS_COLORS[orbit.class ?? 'none'];
    ctx.beginPath();
    ctx.moveTo(tf.toPxX(orbit.points[0][0]), tf.toPxY(orbit.points[0][1]));
    for (let i = 1; i < orbit.points.length; i++) {
      ctx.lineTo(tf.toPxX(orbit.points[i][0]), tf.toPxY(orbit.points[i][1]));
    }
    ctx.stroke();
  }
}

export function drawSelection(ctx: Ctx2D, selection: Rect, tf: Transform): void {
  const x = tf.toPxX(selection.xlo);
  const y = tf.toPxY(selection.yhi);
  const w = tf.toPxX(selection.xhi) - x;
  const h = tf.toPxY(selection.ylo) - y;
  ctx.setLineDash([4, 3]);
  ctx.strokeStyle = '#222222';
  ctx.lineWidth = 1.0;
  ctx.strokeRect(x, y, w, h);
  ctx.setLineDash([]);
}

export function drawPolyline(
  ctx: Ctx2D,
  points: { x: number; y: number }[],
  tf: Transform,
  color: string,
  width = 1.2,
): void {
  if (points.length === 0) return;
  ctx.strokeStyle = color;
  ctx.lineWidth = width;
  ctx.beginPath();
  ctx.moveTo(tf.toPxX(points[0].x), tf.toPxY(points[0].y));
  for (let i = 1; i < points.length; i++) {
    ctx.lineTo(tf.toPxX(points[i].x), tf.toPxY(points[i].y));
  }
  ctx.stroke();
}

export function drawMarkers(
  ctx: Ctx2D,
  points: { x: number; y: number }[],
  tf: Transform,
  color: string,
  size = 3,
): void {
  ctx.strokeStyle = color;
  ctx.lineWidth = 1.5;
  for (const p of points) {
    const px = tf.toPxX(p.x);
    const py = tf.toPxY(p.y);
    ctx.beginPath();
    ctx.moveTo(px - size, py - size);
    ctx.lineTo(px + size, py + size);
    ctx.moveTo(px - size, py + size);
    ctx.lineTo(px + size, py - size);
    ctx.stroke();
  }
}
