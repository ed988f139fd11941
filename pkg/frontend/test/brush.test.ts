import { describe, expect, it } from 'vitest';

import { brushToInitRegion } from '../src/brush.js';

const STATE_VARS = ['x', 'y', 'z'];

describe('brushToInitRegion', () => {
  it('produces exactly the hand-written InitRegion JSON', () => {
    const region = brushToInitRegion(
      STATE_VARS,
      ['x', 'y'],
      { xlo: -1.001, xhi: 1.001, ylo: -1.001, yhi: 1.001 },
      { z: [21.999, 22.001] },
    );
    expect(region).toEqual({
      ranges: [
        { var: 'x', lo: -1.001, hi: 1.001 },
        { var: 'y', lo: -1.001, hi: 1.001 },
        { var: 'z', lo: 21.999, hi: 22.001 },
      ],
    });
    // byte-level equality with the hand-written payload
    expect(JSON.stringify(region)).toBe(
      '{"ranges":[{"var":"x","lo":-1.001,"hi":1.001},' +
      '{"var":"y","lo":-1.001,"hi":1.001},' +
      '{"var":"z","lo":21.999,"hi":22.001}]}',
    );
  });

  it('orders ranges by the system state variables, not the projection', () => {
    const region = brushToInitRegion(
      STATE_VARS,
      ['z', 'x'],
      { xlo: 20, xhi: 30, ylo: -10, yhi: 0 },
      { y: [-1, 1] },
    );
    expect(region.ranges.map((r) => r.var)).toEqual(['x', 'y', 'z']);
    expect(region.ranges[0]).toEqual({ var: 'x', lo: -10, hi: 0 });
    expect(region.ranges[2]).toEqual({ var: 'z', lo: 20, hi: 30 });
  });

  it('blocks lo > hi in the brush', () => {
    expect(() =>
      brushToInitRegion(STATE_VARS, ['x', 'y'],
        { xlo: 1, xhi: -1, ylo: 0, yhi: 1 }, { z: [0, 1] }),
    ).toThrow(/lo > hi/);
  });

  it('blocks lo > hi in an unprojected range', () => {
    expect(() =>
      brushToInitRegion(STATE_VARS, ['x', 'y'],
        { xlo: -1, xhi: 1, ylo: -1, yhi: 1 }, { z: [5, 4] }),
    ).toThrow(/'z' has lo > hi/);
  });

  it('requires ranges for all unprojected variables', () => {
    expect(() =>
      brushToInitRegion(STATE_VARS, ['x', 'y'],
        { xlo: -1, xhi: 1, ylo: -1, yhi: 1 }, {}),
    ).toThrow(/missing range/);
  });

  it('rejects identical projection axes', () => {
    expect(() =>
      brushToInitRegion(STATE_VARS, ['x', 'x'],
        { xlo: -1, xhi: 1, ylo: -1, yhi: 1 }, { y: [0, 1], z: [0, 1] }),
    ).toThrow(/distinct/);
  });

  it('rejects unknown projection axes', () => {
    expect(() =>
      brushToInitRegion(STATE_VARS, ['x', 'w'],
        { xlo: -1, xhi: 1, ylo: -1, yhi: 1 }, { y: [0, 1], z: [0, 1] }),
    ).toThrow(/unknown projection axis/);
  });
});
