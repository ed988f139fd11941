/** Explorer view state and its transitions. State is immutable; every
 * transition returns a new value and enforces the invariants (distinct
 * projection axes, viewport clamped to finite data extents). */
import type { Manifest, OrbitClass } from './api.js';
import { clampRect, isValidRect, type Rect } from './window.js';

export const CLASS_COLORS: Record<Exclude<OrbitClass, null> | 'none', string> = {
  true: '#1f77b4',
  false: '#d62728',
  untestable: '#999999',
  none: '#444444',
};

export interface ViewState {
  runId: string | null;
  manifest: Manifest | null;
  axes: [string, string] | null;
  viewport: Rect | null;
  dataBounds: Rect | null;
  selection: Rect | null;
  activeJobs: string[];
}

export function initialViewState(): ViewState {
  return {
    runId: null,
    manifest: null,
    axes: null,
    viewport: null,
    dataBounds: null,
    selection: null,
    activeJobs: [],
  };
}

export function stateVarsOf(manifest: Manifest): string[] {
  return manifest.region.ranges.map((r) => r.var);
}

export function selectRun(state: ViewState, manifest: Manifest): ViewState {
  const vars = stateVarsOf(manifest);
  const axes: [string, string] | null =
    vars.length >= 2 ? [vars[0], vars[1]] : null;
  return {
    ...initialViewState(),
    runId: manifest.run_id,
    manifest,
    axes,
  };
}

export function setAxes(state: ViewState, x: string, y: string): ViewState {
  if (x === y) {
    throw new Error('projection axes must be distinct variables');
  }
  if (state.manifest !== null) {
    const vars = stateVarsOf(state.manifest);
    if (!vars.includes(x) || !vars.includes(y)) {
      throw new Error('projection axes must be state variables of the run');
    }
  }
  // a new projection invalidates viewport, bounds, and selection
  return { ...state, axes: [x, y], viewport: null, dataBounds: null, selection: null };
}

export function setDataBounds(state: ViewState, bounds: Rect): ViewState {
  if (!isValidRect(bounds)) {
    throw new Error('data bounds must be finite');
  }
  const viewport = state.viewport ?? bounds;
  return { ...state, dataBounds: bounds, viewport: clampRect(viewport, bounds) };
}

export function setViewport(state: ViewState, viewport: Rect): ViewState {
  if (!isValidRect(viewport)) {
    throw new Error('viewport must be finite with lo <= hi');
  }
  const clamped = state.dataBounds ? clampRect(viewport, state.dataBounds) : viewport;
  return { ...state, viewport: clamped };
}

export function setSelection(state: ViewState, selection: Rect | null): ViewState {
  if (selection !== null && !isValidRect(selection)) {
    throw new Error('selection must be finite with lo <= hi');
  }
  return { ...state, selection };
}

export function trackJob(state: ViewState, jobId: string): ViewState {
  return { ...state, activeJobs: [...state.activeJobs, jobId] };
}

export function dropJob(state: ViewState, jobId: string): ViewState {
  return { ...state, activeJobs: state.activeJobs.filter((j) => j !== jobId) };
}
