"""Run persistence round-trip and integrity tests."""
from __future__ import annotations

import json
import os

import numpy as np
import pytest

from chaoscope.boundary import BoxcountResult, InitRegion
from chaoscope.errors import DuplicateRunError, IntegrityError, RunNotFoundError
from chaoscope.integrate import IntegratorConfig, Trajectory, TrajectoryStatus
from chaoscope.store import RunManifest, list_runs, load_run, save_run
from chaoscope.systems import LORENZ_SOURCE
from chaoscope.sysdsl import parse_system

REGION = InitRegion((("x", -1.0, 1.0), ("y", -1.0, 1.0), ("z", 21.999, 22.001)))


def _manifest(run_id="run-a", created="2026-01-02T03:04:05+00:00"):
    return RunManifest(
        run_id=run_id,
        created_at=created,
        system_source=LORENZ_SOURCE,
        system_name="lorenz",
        predicate_source="x < 0",
        region=REGION,
        cfg=IntegratorConfig(h=0.02, t0=0.0, t1=16.0, sample_stride=2),
        seed=42,
    )


def _trajectory(i=0):
    # values chosen to exercise binary-exact round-tripping
    times = np.array([0.0, 0.1, 1.0 / 3.0])
    states = np.array([
        [0.1, -0.0, 1e-300],
        [2.0 / 3.0, 1e308, -1.2345678901234567e-5],
        [np.pi, -np.e, 22.000000000000004],
    ])
    return Trajectory(ic_index=i, times=times, states=states,
                      status=TrajectoryStatus(completed=True))


def test_save_load_round_trip(tmp_path):
    root = str(tmp_path)
    trajs = [_trajectory(0), _trajectory(1)]
    result = BoxcountResult(epsilon=2e-7, delta=2e-7 / 2.002, n_testable=100,
                            n_boundary=3, n_excluded=0)
    run_id = save_run(root, _manifest(), trajectories=trajs, results=[result])
    loaded = load_run(root, run_id)
    m = loaded.manifest
    assert m.run_id == "run-a"
    assert m.system_name == "lorenz"
    assert m.seed == 42
    assert m.region == REGION
    assert m.cfg == IntegratorConfig(h=0.02, t0=0.0, t1=16.0, sample_stride=2)
    assert m.n_trajectories == 2
    assert parse_system(m.system_source, "lorenz").state_vars == ("x", "y", "z")

    back = loaded.load_trajectory(1)
    assert np.array_equal(back.times, trajs[1].times)
    assert np.array_equal(back.states, trajs[1].states)
    assert back.status.completed

    stored = loaded.load_result(m.result_refs[0])
    assert stored["kind"] == "boxcount"
    assert stored["epsilon"] == 2e-7
    assert stored["n_boundary"] == 3
    assert stored["fraction"] == 0.03


def test_trajectory_csv_bit_exact(tmp_path):
    root = str(tmp_path)
    run_id = save_run(root, _manifest(), trajectories=[_trajectory()])
    path = load_run(root, run_id).trajectory_path(0)
    header = open(path).readline().strip()
    assert header == "t,x,y,z"
    back = load_run(root, run_id).load_trajectory(0)
    src = _trajectory()
    assert np.array_equal(back.times, src.times)
    assert np.array_equal(back.states, src.states)


def test_failed_trajectory_status_round_trip(tmp_path):
    traj = Trajectory(
        ic_index=0,
        times=np.array([0.0, 0.5]),
        states=np.array([[1.0, 0.0, 0.0], [2.0, 0.0, 0.0]]),
        status=TrajectoryStatus(completed=False, reason="non-finite state in step to t=0.6",
                                last_good_time=0.5),
    )
    run_id = save_run(str(tmp_path), _manifest(), trajectories=[traj])
    back = load_run(str(tmp_path), run_id).load_trajectory(0)
    assert back.status == traj.status


def test_duplicate_run_id(tmp_path):
    save_run(str(tmp_path), _manifest())
    with pytest.raises(DuplicateRunError):
        save_run(str(tmp_path), _manifest())


def test_unknown_run_id(tmp_path):
    with pytest.raises(RunNotFoundError):
        load_run(str(tmp_path), "nope")


def test_dangling_result_ref(tmp_path):
    result = BoxcountResult(epsilon=1e-3, delta=5e-4, n_testable=10, n_boundary=1,
                            n_excluded=0)
    run_id = save_run(str(tmp_path), _manifest(), results=[result])
    os.unlink(tmp_path / run_id / "result_0.json")
    with pytest.raises(IntegrityError, match="missing file"):
        load_run(str(tmp_path), run_id)


def test_missing_trajectory_file(tmp_path):
    run_id = save_run(str(tmp_path), _manifest(), trajectories=[_trajectory()])
    os.unlink(tmp_path / run_id / "ic_0.csv")
    loaded = load_run(str(tmp_path), run_id)
    with pytest.raises(IntegrityError, match="ic_0"):
        loaded.load_trajectory(0)


def test_list_runs_sorted_and_ignores_junk(tmp_path):
    root = str(tmp_path)
    assert list_runs(root) == []
    for i, stamp in enumerate(["2026-01-01T00:00:00+00:00",
                               "2026-03-01T00:00:00+00:00",
                               "2026-02-01T00:00:00+00:00"]):
        save_run(root, _manifest(run_id=f"run-{i}", created=stamp))
    (tmp_path / "notes.txt").write_text("not a run")
    os.makedirs(tmp_path / "empty-dir")
    entries = list_runs(root)
    assert [e[0] for e in entries] == ["run-1", "run-2", "run-0"]
    assert all(e[2] == "lorenz" for e in entries)


def test_unwritable_root_is_io_error(tmp_path):
    blocker = tmp_path / "not-a-dir"
    blocker.write_text("occupied")
    with pytest.raises(OSError):
        save_run(str(blocker), _manifest())


def test_concurrent_saves_both_complete(tmp_path):
    from concurrent.futures import ThreadPoolExecutor

    from chaoscope.store import new_run_id

    ids = [new_run_id() + f"-{i}" for i in range(8)]
    assert len(set(ids)) == 8

    def save(run_id):
        return save_run(str(tmp_path), _manifest(run_id=run_id),
                        trajectories=[_trajectory()])

    with ThreadPoolExecutor(max_workers=8) as pool:
        done = list(pool.map(save, ids))
    assert sorted(done) == sorted(ids)
    for run_id in ids:
        loaded = load_run(str(tmp_path), run_id)
        assert loaded.manifest.n_trajectories == 1
        loaded.load_trajectory(0)


def test_partial_write_never_visible(tmp_path):
    # a failed save leaves no run directory behind
    bad = Trajectory(ic_index=0, times=np.array([0.0]), states=np.array([[1.0, 2.0, 3.0]]),
                     status=TrajectoryStatus(completed=True))
    # break the write by making the region mismatch the state width
    class Boom(Exception):
        pass

    import chaoscope.store as store_mod

    original = store_mod._write_trajectory_csv

    def explode(*a, **k):
        raise Boom()

    store_mod._write_trajectory_csv = explode
    try:
        with pytest.raises(Boom):
            save_run(str(tmp_path), _manifest(), trajectories=[bad])
    finally:
        store_mod._write_trajectory_csv = original
    assert list_runs(str(tmp_path)) == []
    assert not (tmp_path / "run-a").exists()
