import { describe, expect, it } from 'vitest';

import type { Manifest } from '../src/api.js';
import {
  initialViewState,
  selectRun,
  setAxes,
  setDataBounds,
  setSelection,
  setViewport,
  stateVarsOf,
} from '../src/viewstate.js';

const MANIFEST: Manifest = {
  run_id: 'r1',
  created_at: 't',
  system_source: 'diff(x,t) = 0',
  system_name: 'lorenz',
  predicate_source: 'x < 0',
  region: {
    ranges: [
      { var: 'x', lo: -1, hi: 1 },
      { var: 'y', lo: -1, hi: 1 },
      { var: 'z', lo: 21, hi: 23 },
    ],
  },
  cfg: { method: 'native_rk5', h: 0.01, t0: 0, t1: 1, sample_stride: 1 },
  seed: 0,
  result_refs: [],
  n_trajectories: 4,
};

describe('selectRun', () => {
  it('defaults to the first two state variables', () => {
    const state = selectRun(initialViewState(), MANIFEST);
    expect(stateVarsOf(MANIFEST)).toEqual(['x', 'y', 'z']);
    expect(state.axes).toEqual(['x', 'y']);
    expect(state.runId).toBe('r1');
  });
});

describe('setAxes', () => {
  it('rejects identical variables', () => {
    const state = selectRun(initialViewState(), MANIFEST);
    expect(() => setAxes(state, 'x', 'x')).toThrow(/distinct/);
  });

  it('rejects variables outside the run', () => {
    const state = selectRun(initialViewState(), MANIFEST);
    expect(() => setAxes(state, 'x', 'w')).toThrow(/state variables/);
  });

  it('invalidates the viewport and selection', () => {
    let state = selectRun(initialViewState(), MANIFEST);
    state = setDataBounds(state, { xlo: 0, xhi: 1, ylo: 0, yhi: 1 });
    state = setSelection(state, { xlo: 0.2, xhi: 0.4, ylo: 0.2, yhi: 0.4 });
    state = setAxes(state, 'x', 'z');
    expect(state.viewport).toBeNull();
    expect(state.selection).toBeNull();
  });
});

describe('viewport invariants', () => {
  it('clamps the viewport inside the data bounds', () => {
    let state = selectRun(initialViewState(), MANIFEST);
    state = setDataBounds(state, { xlo: -10, xhi: 10, ylo: 0, yhi: 40 });
    state = setViewport(state, { xlo: 5, xhi: 25, ylo: -20, yhi: 20 });
    expect(state.viewport).not.toBeNull();
    const vp = state.viewport!;
    expect(vp.xhi).toBeLessThanOrEqual(10);
    expect(vp.ylo).toBeGreaterThanOrEqual(0);
  });

  it('rejects non-finite viewports', () => {
    const state = selectRun(initialViewState(), MANIFEST);
    expect(() => setViewport(state, { xlo: -Infinity, xhi: 0, ylo: 0, yhi: 1 }))
      .toThrow(/finite/);
  });
});
