/** Turning a brushed rectangle into an initial-condition region payload.
 *
 * The brush covers the two projected axes; every other state variable needs
 * an explicit range. The payload lists ranges in state-variable order and is
 * exactly the InitRegion JSON the service accepts.
 */
import type { InitRegionJson } from './api.js';
import type { Rect } from './window.js';

export function brushToInitRegion(
  stateVars: string[],
  projAxes: [string, string],
  brush: Rect,
  otherRanges: Record<string, [number, number]>,
): InitRegionJson {
  const [ax, ay] = projAxes;
  if (ax === ay) {
    throw new Error('projection axes must be distinct variables');
  }
  for (const axis of projAxes) {
    if (!stateVars.includes(axis)) {
      throw new Error(`unknown projection axis '${axis}'`);
    }
  }
  if (brush.xlo > brush.xhi || brush.ylo > brush.yhi) {
    throw new Error('brush rectangle has lo > hi');
  }
  const ranges = stateVars.map((name) => {
    if (name === ax) return { var: name, lo: brush.xlo, hi: brush.xhi };
    if (name === ay) return { var: name, lo: brush.ylo, hi: brush.yhi };
    const range = otherRanges[name];
    if (range === undefined) {
      throw new Error(`missing range for unprojected variable '${name}'`);
    }
    const [lo, hi] = range;
    if (!(Number.isFinite(lo) && Number.isFinite(hi))) {
      throw new Error(`range for '${name}' must be finite`);
    }
    if (lo > hi) {
      throw new Error(`range for '${name}' has lo > hi`);
    }
    return { var: name, lo, hi };
  });
  return { ranges };
}
