"""Fractal family counts, box counting, and dimension regression tests."""
from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chaoscope.fractal import (
    BoxCountSeries,
    FractalFamily,
    box_count_points,
    estimate_dimension,
    family_counts,
    fit_loglog,
    middle_thirds_points,
)


# family counts --------------------------------------------------------------


def test_family_counts_quadruple_split():
    series = family_counts(FractalFamily(4, 3, 3))
    assert series.points == ((1 / 3, 4), (1 / 9, 16), (1 / 27, 64))


def test_family_counts_space_filling():
    series = family_counts(FractalFamily(3, 3, 2))
    assert series.points == ((1 / 3, 3), (1 / 9, 9))


def test_family_counts_middle_thirds():
    series = family_counts(FractalFamily(2, 3, 2))
    assert series.points == ((1 / 3, 2), (1 / 9, 4))


def test_family_overflow_guard():
    with pytest.raises(OverflowError):
        family_counts(FractalFamily(4, 5, 40))


def test_family_validation():
    with pytest.raises(ValueError):
        FractalFamily(0, 3, 1)
    with pytest.raises(ValueError):
        FractalFamily(2, 1, 1)
    with pytest.raises(ValueError):
        FractalFamily(2, 3, 0)
    with pytest.raises(ValueError):
        FractalFamily(5, 3, 2)  # beyond the permitted quadruple-split exception
    FractalFamily(4, 3, 2)  # allowed explicitly


# box counting ---------------------------------------------------------------


def test_box_count_single_point():
    for delta in (1.0, 0.5, 0.1, 0.007):
        assert box_count_points(np.array([[0.4, 0.6]]), delta) == 1


def test_box_count_four_corners():
    corners = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
    assert box_count_points(corners, 0.5) == 4
    assert box_count_points(corners, 1.0) == 1


def test_box_count_uniform_covers_grid():
    # 10000 uniform points, delta=0.1: every one of the 100 cells is occupied
    # with probability > 1 - 100 * 0.99^10000; deterministic at fixed seed
    rng = np.random.default_rng(123)
    pts = rng.random((10000, 2))
    assert box_count_points(pts, 0.1) == 100


def test_box_count_empty_errors():
    with pytest.raises(ValueError):
        box_count_points(np.empty((0, 2)), 0.5)


def test_box_count_out_of_cube_errors():
    with pytest.raises(ValueError):
        box_count_points(np.array([[1.2, 0.0]]), 0.5)


def test_box_count_top_edge_clamped():
    assert box_count_points(np.array([[1.0]]), 0.1) == 1
    # 1.0 and a point inside the last cell share it
    assert box_count_points(np.array([[1.0], [0.95]]), 0.1) == 1


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=25, deadline=None)
def test_box_count_permutation_invariant_and_monotone(seed):
    rng = np.random.default_rng(seed)
    pts = rng.random((200, 2))
    shuffled = pts[rng.permutation(200)]
    assert box_count_points(pts, 0.25) == box_count_points(shuffled, 0.25)
    # finer cells can only reveal more occupied cells
    assert box_count_points(pts, 0.25) <= box_count_points(pts, 0.125)


def test_middle_thirds_geometry_dimension():
    pts = middle_thirds_points(7)
    deltas = [3.0**-m for m in range(1, 7)]
    series = BoxCountSeries(tuple((d, box_count_points(pts, d)) for d in deltas))
    est = estimate_dimension(series)
    assert est.d == pytest.approx(math.log(2) / math.log(3), abs=0.01)


# dimension estimation -------------------------------------------------------


def test_estimate_dimension_quadruple_split_exact():
    est = estimate_dimension(family_counts(FractalFamily(4, 3, 6)))
    assert abs(est.d - math.log(4) / math.log(3)) < 1e-12
    assert est.pearson_r == pytest.approx(-1.0, abs=1e-12)


def test_estimate_dimension_space_filling():
    est = estimate_dimension(family_counts(FractalFamily(3, 3, 4)))
    assert abs(est.d - 1.0) < 1e-12


def test_estimate_dimension_two_point_line():
    est = estimate_dimension([(0.5, 2), (0.25, 4)])
    assert est.d == pytest.approx(1.0, abs=1e-15)
    assert est.se_slope == 0.0


@given(
    b=st.integers(1, 3),
    s=st.integers(3, 6),
    M=st.integers(2, 12),
)
@settings(max_examples=50, deadline=None)
def test_estimate_matches_log_ratio_exactly(b, s, M):
    est = estimate_dimension(family_counts(FractalFamily(b, s, M)))
    assert abs(est.d - math.log(b) / math.log(s)) < 1e-12


def test_estimate_reorder_invariant():
    pts = [(0.5, 3), (0.25, 9), (0.125, 30), (0.0625, 80)]
    a = estimate_dimension(pts)
    b = estimate_dimension(list(reversed(pts)))
    assert a.d == pytest.approx(b.d, rel=1e-15)
    assert a.pearson_r == pytest.approx(b.pearson_r, rel=1e-15)
    assert a.se_slope == pytest.approx(b.se_slope, rel=1e-12)


def test_estimate_degenerate_abscissae():
    with pytest.raises(ValueError, match="degenerate"):
        fit_loglog([0.5, 0.5], [2, 4])


def test_series_validation():
    with pytest.raises(ValueError):
        BoxCountSeries(((0.5, 2),))  # too short
    with pytest.raises(ValueError):
        BoxCountSeries(((0.25, 2), (0.5, 4)))  # delta increasing
    with pytest.raises(ValueError):
        BoxCountSeries(((0.5, 4), (0.25, 2)))  # counts decreasing
    with pytest.raises(ValueError):
        BoxCountSeries(((1.5, 2), (0.25, 4)))  # delta out of range
