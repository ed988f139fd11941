/** Regression view: the (ln delta, ln fraction) points and the fitted line.
 *
 * All numerics come from the service response; the slope and intercept are
 * never refitted here, only rendered.
 */
import type { FdimData, ResultEntry } from './api.js';

export interface XY {
  x: number;
  y: number;
}

export function isFdimData(data: unknown): data is FdimData {
  return (
    typeof data === 'object' && data !== null &&
    (data as { kind?: string }).kind === 'fdim'
  );
}

export function extractFdim(results: ResultEntry[]): FdimData | null {
  for (const entry of results) {
    if (isFdimData(entry.data)) return entry.data;
  }
  return null;
}

/** Points with zero fraction carry no log information and are not drawn. */
export function logPoints(data: FdimData): XY[] {
  return data.points
    .filter((p) => p.fraction > 0 && p.delta > 0)
    .map((p) => ({ x: Math.log(p.delta), y: Math.log(p.fraction) }));
}

/** Endpoints of the service-fitted line y = intercept + alpha * x. */
export function fittedLine(data: FdimData, xMin: number, xMax: number): [XY, XY] {
  return [
    { x: xMin, y: data.intercept + data.alpha * xMin },
    { x: xMax, y: data.intercept + data.alpha * xMax },
  ];
}

export function summaryText(data: FdimData): string {
  return (
    `Fractal dimension = ${data.d_B} | alpha = ${data.alpha} | ` +
    `statistical error = ${data.se_percent} % | linear correlation = ${data.pearson_r}`
  );
}
