"""Request validation and orchestration tests shared by CLI and service."""
from __future__ import annotations

import pytest

from chaoscope.pipeline import BoxcountRequest, FdimRequest, SolveRequest, run_solve
from chaoscope.store import load_run
from chaoscope.systems import CONSTANT_SOURCE

BASE = {
    "system_source": CONSTANT_SOURCE,
    "system_name": "constant",
    "region": {"ranges": [{"var": "x", "lo": -1, "hi": 1}]},
    "t_calc_step": 0.1,
    "number_ic": 4,
}


def _solve(**overrides):
    payload = dict(BASE, t_range=[0, 1], **overrides)
    return SolveRequest.from_dict(payload)


def _boxcount(**overrides):
    payload = dict(BASE, predicate="x<0", t_final=1.0, epsilon=0.05, **overrides)
    return BoxcountRequest.from_dict(payload)


def _fdim(**overrides):
    payload = dict(BASE, predicate="x<0", t_final=1.0,
                   epsilon_range=[1e-3, 1e-1], n_epsilons=5, **overrides)
    return FdimRequest.from_dict(payload)


def test_solve_defaults():
    req = _solve()
    assert req.sample_stride == 1
    assert req.seed == 0
    assert req.method == "native_rk5"


def test_solve_stride_from_plot_step():
    assert _solve(t_plot_step=0.5).sample_stride == 5


@pytest.mark.parametrize("patch,message", [
    ({"t_range": [1, 0]}, "t_range"),
    ({"t_range": [0]}, "t_range"),
    ({"t_calc_step": 0}, "t_calc_step"),
    ({"number_ic": 0}, "number_ic"),
    ({"number_ic": 2.5}, "number_ic"),
    ({"t_plot_step": 0.15}, "t_plot_step"),
    ({"method": "magic"}, "method"),
    ({"region": {"ranges": []}}, "region"),
    ({"plot_vars": ["x"]}, "plot_vars"),
])
def test_solve_validation(patch, message):
    payload = dict(BASE, t_range=[0, 1])
    payload.update(patch)
    with pytest.raises(ValueError, match=message):
        SolveRequest.from_dict(payload)


@pytest.mark.parametrize("patch,message", [
    ({"epsilon": 0}, "epsilon"),
    ({"epsilon": -1}, "epsilon"),
    ({"predicate": "  "}, "predicate"),
    ({"t_final": 0, "t_start": 0}, "t_final"),
    ({"k": 0}, "k"),
])
def test_boxcount_validation(patch, message):
    payload = dict(BASE, predicate="x<0", t_final=1.0, epsilon=0.05)
    payload.update(patch)
    with pytest.raises(ValueError, match=message):
        BoxcountRequest.from_dict(payload)


@pytest.mark.parametrize("patch,message", [
    ({"epsilon_range": [1e-1, 1e-3]}, "epsilon_range"),
    ({"epsilon_range": [0, 1e-3]}, "epsilon_range"),
    ({"n_epsilons": 1}, "n_epsilons"),
])
def test_fdim_validation(patch, message):
    payload = dict(BASE, predicate="x<0", t_final=1.0,
                   epsilon_range=[1e-3, 1e-1], n_epsilons=5)
    payload.update(patch)
    with pytest.raises(ValueError, match=message):
        FdimRequest.from_dict(payload)


def test_missing_required_field():
    payload = dict(BASE, t_range=[0, 1])
    del payload["system_source"]
    with pytest.raises(ValueError, match="system_source"):
        SolveRequest.from_dict(payload)


def test_run_solve_persists_expected_layout(tmp_path):
    req = _solve(run_id="layout", created_at="2026-01-01T00:00:00+00:00", seed=5)
    run_id = run_solve(req, str(tmp_path))
    assert run_id == "layout"
    loaded = load_run(str(tmp_path), run_id)
    assert loaded.manifest.n_trajectories == 4
    assert loaded.manifest.created_at == "2026-01-01T00:00:00+00:00"
    traj = loaded.load_trajectory(3)
    assert traj.status.completed
    assert len(traj.times) == 11


def test_run_solve_progress_reported(tmp_path):
    seen = []
    req = _solve(run_id="progress")
    run_solve(req, str(tmp_path), progress=lambda done, total: seen.append((done, total)))
    assert seen[-1] == (4, 4)
