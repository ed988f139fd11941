"""Fixed-step fifth-order Runge-Kutta integration on the Cash-Karp tableau.

The batched stepping core advances a whole ensemble of initial conditions in
lockstep through vectorized numpy arithmetic. All operations are elementwise
per orbit, so results are bitwise independent of how an ensemble is chunked
across workers.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence

import numpy as np

from ..sysdsl import SystemDef, compile_rhs, eval_rhs
from . import tableau as tb
from .types import (
    IntegratorConfig,
    METHOD_PLUGIN,
    Trajectory,
    TrajectoryStatus,
)

# Grid tolerance: t1 is treated as lying on the step grid when it is within
# this fraction of one step of the nearest grid point.
_GRID_RTOL = 1e-9


def _require_plugin(cfg: IntegratorConfig):
    if cfg.plugin is None:
        raise ValueError("method 'plugin' requires a built PluginSpec in the config")
    return cfg.plugin


def step_plan(t0: float, t1: float, h: float) -> tuple[int, bool]:
    """Number of full h-steps from t0 towards t1 and whether a shortened
    final step is needed to land exactly on t1."""
    span = t1 - t0
    m = int(np.floor(span / h + 0.5))
    if abs(span - m * h) > _GRID_RTOL * h:
        m = int(np.floor(span / h))
    partial = (t1 - (t0 + m * h)) > _GRID_RTOL * h
    return m, partial


def _ck_step(f: Callable, t: float, x: np.ndarray, h: float) -> np.ndarray:
    k1 = f(t, x)
    k2 = f(t + tb.C2 * h, x + h * (tb.A21 * k1))
    k3 = f(t + tb.C3 * h, x + h * (tb.A31 * k1 + tb.A32 * k2))
    k4 = f(t + tb.C4 * h, x + h * (tb.A41 * k1 + tb.A42 * k2 + tb.A43 * k3))
    k5 = f(t + tb.C5 * h, x + h * (tb.A51 * k1 + tb.A52 * k2 + tb.A53 * k3 + tb.A54 * k4))
    k6 = f(t + tb.C6 * h,
           x + h * (tb.A61 * k1 + tb.A62 * k2 + tb.A63 * k3 + tb.A64 * k4 + tb.A65 * k5))
    return x + h * (tb.B1 * k1 + tb.B3 * k3 + tb.B4 * k4 + tb.B6 * k6)


def rk5_step(sys: SystemDef, t: float, x: Sequence[float], h: float) -> np.ndarray:
    """One Cash-Karp step with full domain checking; pure and deterministic."""
    if not h > 0:
        raise ValueError("step size must be positive")
    x = np.asarray(x, dtype=float)
    if x.shape != (sys.dimension,):
        raise ValueError(f"state must have shape ({sys.dimension},)")
    return _ck_step(lambda tt, xx: eval_rhs(sys, tt, xx), t, x, h)


def _batch_core(
    f: Callable,
    x0s: np.ndarray,
    t0: float,
    t1: float,
    h: float,
    stride: int,
    record: bool,
):
    """Advance a batch of orbits; returns (times, sample_steps, buffer,
    rec_count, finals, fail_step) where fail_step[i] is the 1-based step that
    produced a non-finite state for orbit i, or 0 if it completed."""
    m, partial = step_plan(t0, t1, h)
    n_orbits = x0s.shape[0]

    grid_steps = list(range(0, m + 1, stride))
    extra = partial or (m % stride != 0)
    sample_steps = list(grid_steps)
    times = [t0 + j * h for j in grid_steps]
    if extra:
        sample_steps.append(m + 1 if partial else m)
        times.append(t1)

    buf = None
    if record:
        buf = np.empty((len(sample_steps), n_orbits, x0s.shape[1]))
        buf[0] = x0s
    rec_count = 1

    cur = np.array(x0s, dtype=float, copy=True)
    alive = np.ones(n_orbits, dtype=bool)
    fail_step = np.zeros(n_orbits, dtype=np.int64)

    with np.errstate(all="ignore"):
        for j in range(1, m + 1):
            nxt = _ck_step(f, t0 + (j - 1) * h, cur, h)
            finite = np.isfinite(nxt).all(axis=-1)
            newly_dead = alive & ~finite
            fail_step[newly_dead] = j
            keep = alive & finite
            cur = np.where(keep[:, None], nxt, cur)
            alive = keep
            if j % stride == 0:
                if record:
                    buf[rec_count] = cur
                rec_count += 1
            if not alive.any():
                break
        if partial and alive.any():
            h2 = t1 - (t0 + m * h)
            nxt = _ck_step(f, t0 + m * h, cur, h2)
            finite = np.isfinite(nxt).all(axis=-1)
            newly_dead = alive & ~finite
            fail_step[newly_dead] = m + 1
            keep = alive & finite
            cur = np.where(keep[:, None], nxt, cur)
            alive = keep
        if extra and alive.any():
            if record:
                buf[rec_count] = cur
            rec_count += 1

    return np.asarray(times), sample_steps, buf, rec_count, cur, fail_step


def _batch_trajectories(
    f, x0s, t0, t1, h, stride, ic_offset: int
) -> list[Trajectory]:
    times, sample_steps, buf, rec_count, _, fail_step = _batch_core(
        f, x0s, t0, t1, h, stride, record=True
    )
    sample_steps = np.asarray(sample_steps)
    out = []
    for i in range(x0s.shape[0]):
        if fail_step[i] == 0:
            status = TrajectoryStatus(completed=True)
            keep = slice(0, len(sample_steps))
        else:
            fs = int(fail_step[i])
            t_fail = t1 if fs > step_plan(t0, t1, h)[0] else t0 + fs * h
            last_good = t0 + (fs - 1) * h
            status = TrajectoryStatus(
                completed=False,
                reason=f"non-finite state in step to t={t_fail!r}",
                last_good_time=last_good,
            )
            keep = sample_steps < fs
        # never keep slots past what was actually recorded
        mask = np.zeros(len(sample_steps), dtype=bool)
        mask[:rec_count] = True
        if isinstance(keep, slice):
            sel = mask
        else:
            sel = mask & keep
        out.append(
            Trajectory(
                ic_index=ic_offset + i,
                times=times[sel],
                states=buf[sel, i, :],
                status=status,
            )
        )
    return out


def _chunks(count: int, workers: int) -> list[tuple[int, int]]:
    workers = max(1, min(workers, count))
    bounds = np.linspace(0, count, workers + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def integrate(sys: SystemDef, x0: Sequence[float], cfg: IntegratorConfig) -> Trajectory:
    """Integrate one initial condition from t0 to t1 with fixed step h.

    Failure (non-finite state or arithmetic domain error) is reported through
    Trajectory.status, never raised: callers must check it.
    """
    if cfg.method == METHOD_PLUGIN:
        from .plugin import run_plugin

        return run_plugin(_require_plugin(cfg), x0, cfg)
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (sys.dimension,):
        raise ValueError(f"initial condition must have shape ({sys.dimension},)")
    f = compile_rhs(sys)
    return _batch_trajectories(
        f, x0[None, :], cfg.t0, cfg.t1, cfg.h, cfg.sample_stride, ic_offset=0
    )[0]


def integrate_ensemble(
    sys: SystemDef,
    x0s: np.ndarray,
    cfg: IntegratorConfig,
    workers: int = 1,
) -> list[Trajectory]:
    """Integrate many initial conditions; results are ordered by input row and
    bitwise independent of the worker count."""
    x0s = np.asarray(x0s, dtype=float)
    if x0s.ndim != 2 or x0s.shape[1] != sys.dimension:
        raise ValueError(f"initial conditions must have shape (m, {sys.dimension})")
    if cfg.method == METHOD_PLUGIN:
        from .plugin import run_plugin

        spec = _require_plugin(cfg)
        return [
            _reindex(run_plugin(spec, x0s[i], cfg), i) for i in range(x0s.shape[0])
        ]
    f = compile_rhs(sys)
    spans = _chunks(x0s.shape[0], workers)
    if len(spans) <= 1:
        return _batch_trajectories(
            f, x0s, cfg.t0, cfg.t1, cfg.h, cfg.sample_stride, ic_offset=0
        )
    with ThreadPoolExecutor(max_workers=len(spans)) as pool:
        futures = [
            pool.submit(
                _batch_trajectories,
                f, x0s[a:b], cfg.t0, cfg.t1, cfg.h, cfg.sample_stride, a,
            )
            for a, b in spans
        ]
        out: list[Trajectory] = []
        for fut in futures:
            out.extend(fut.result())
    return out


def _reindex(traj: Trajectory, ic_index: int) -> Trajectory:
    traj.ic_index = ic_index
    return traj


def integrate_final_states(
    sys: SystemDef,
    x0s: np.ndarray,
    cfg: IntegratorConfig,
    workers: int = 1,
) -> tuple[np.ndarray, np.ndarray]:
    """Ensemble path for callers that only need the state at t1.

    Returns (finals, completed): rows of finals are meaningful only where
    completed is True. Honors cfg.method, so boundary statistics can run
    through an external plugin as well as the native stepper.
    """
    x0s = np.asarray(x0s, dtype=float)
    if cfg.method == METHOD_PLUGIN:
        return _plugin_final_states(x0s, cfg, workers)
    f = compile_rhs(sys)
    t0, t1, h = cfg.t0, cfg.t1, cfg.h

    def run(span):
        a, b = span
        _, _, _, _, finals, fail_step = _batch_core(
            f, x0s[a:b], t0, t1, h, stride=1, record=False
        )
        return finals, fail_step == 0

    spans = _chunks(x0s.shape[0], workers)
    if len(spans) <= 1:
        return run((0, x0s.shape[0]))
    with ThreadPoolExecutor(max_workers=len(spans)) as pool:
        parts = list(pool.map(run, spans))
    finals = np.concatenate([p[0] for p in parts], axis=0)
    completed = np.concatenate([p[1] for p in parts], axis=0)
    return finals, completed


def _plugin_final_states(
    x0s: np.ndarray, cfg: IntegratorConfig, workers: int
) -> tuple[np.ndarray, np.ndarray]:
    from dataclasses import replace

    from .plugin import run_plugin

    spec = _require_plugin(cfg)
    # a stride longer than the run records only the endpoints
    sparse = replace(cfg, sample_stride=2**31 - 1)

    def run_one(x0):
        traj = run_plugin(spec, x0, sparse)
        return traj.final_state, traj.status.completed

    if workers <= 1 or x0s.shape[0] <= 1:
        results = [run_one(x0) for x0 in x0s]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_one, x0s))
    finals = np.array([r[0] for r in results])
    completed = np.array([r[1] for r in results], dtype=bool)
    return finals, completed
