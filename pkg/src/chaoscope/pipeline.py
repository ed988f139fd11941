"""Orchestration shared by the CLI and the HTTP service.

Requests are plain dataclasses built from JSON-compatible dicts; validation
lives in the from_dict constructors so both front ends reject bad input
identically. Run functions persist through the store and report progress as
completed initial conditions out of the total.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .boundary import (
    BoxcountResult,
    FdimResult,
    InitRegion,
    boxcount,
    classify,
    fdimension,
    sample_ics,
)
from .errors import JobCancelled
from .integrate import (
    DEFAULT_COMPILE_COMMAND,
    IntegratorConfig,
    METHOD_NATIVE,
    METHOD_PLUGIN,
    Trajectory,
    build_plugin,
    integrate_ensemble,
)
from .store import RunManifest, new_run_id, save_run, utc_now
from .sysdsl import Predicate, SystemDef, parse_predicate, parse_system

_SOLVE_BATCH = 256

ProgressFn = Callable[[int, int], None]
CancelFn = Callable[[], bool]


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ValueError(message)


def _get(obj: dict, key: str, kind, required: bool = True, default=None):
    if key not in obj or obj[key] is None:
        _require(not required, f"missing required field {key!r}")
        return default
    value = obj[key]
    if kind is float:
        _require(isinstance(value, (int, float)) and not isinstance(value, bool),
                 f"field {key!r} must be a number")
        return float(value)
    if kind is int:
        _require(isinstance(value, int) and not isinstance(value, bool),
                 f"field {key!r} must be an integer")
        return value
    if kind is str:
        _require(isinstance(value, str), f"field {key!r} must be a string")
        return value
    raise TypeError(kind)


def _parse_region(obj: dict) -> InitRegion:
    _require("region" in obj and isinstance(obj["region"], dict),
             "missing required field 'region'")
    ranges = obj["region"].get("ranges")
    _require(isinstance(ranges, list) and len(ranges) >= 1,
             "region.ranges must be a non-empty list")
    parsed = []
    for r in ranges:
        _require(isinstance(r, dict) and {"var", "lo", "hi"} <= set(r),
                 "each region range needs var, lo, hi")
        parsed.append((str(r["var"]), float(r["lo"]), float(r["hi"])))
    return InitRegion(tuple(parsed))


def _stride_for(t_calc_step: float, t_plot_step: Optional[float]) -> int:
    if t_plot_step is None:
        return 1
    stride = int(round(t_plot_step / t_calc_step))
    _require(stride >= 1 and abs(stride * t_calc_step - t_plot_step) <= 1e-9 * t_calc_step,
             "t_plot_step must be a positive integer multiple of t_calc_step")
    return stride


@dataclass(frozen=True)
class SolveRequest:
    system_source: str
    system_name: str
    region: InitRegion
    t0: float
    t1: float
    t_calc_step: float
    sample_stride: int
    number_ic: int
    seed: int
    predicate_source: str = ""
    method: str = METHOD_NATIVE
    compile_command: str = DEFAULT_COMPILE_COMMAND
    run_id: Optional[str] = None
    created_at: Optional[str] = None
    plot_vars: Optional[tuple[str, str]] = None
    plot_svg: bool = False

    @staticmethod
    def from_dict(obj: dict) -> "SolveRequest":
        t_range = obj.get("t_range")
        _require(isinstance(t_range, (list, tuple)) and len(t_range) == 2,
                 "t_range must be [t0, t1]")
        t0, t1 = float(t_range[0]), float(t_range[1])
        _require(t1 > t0, "t_range must satisfy t1 > t0")
        h = _get(obj, "t_calc_step", float)
        _require(h > 0, "t_calc_step must be positive")
        number_ic = _get(obj, "number_ic", int)
        _require(number_ic >= 1, "number_ic must be positive")
        method = _get(obj, "method", str, required=False, default=METHOD_NATIVE)
        _require(method in (METHOD_NATIVE, METHOD_PLUGIN),
                 f"method must be {METHOD_NATIVE!r} or {METHOD_PLUGIN!r}")
        plot_vars = None
        if obj.get("plot_vars") is not None:
            pv = obj["plot_vars"]
            _require(isinstance(pv, (list, tuple)) and len(pv) == 2,
                     "plot_vars must name exactly two variables")
            plot_vars = (str(pv[0]), str(pv[1]))
        return SolveRequest(
            system_source=_get(obj, "system_source", str),
            system_name=_get(obj, "system_name", str, required=False, default="system"),
            predicate_source=_get(obj, "predicate", str, required=False, default=""),
            region=_parse_region(obj),
            t0=t0,
            t1=t1,
            t_calc_step=h,
            sample_stride=_stride_for(h, _get(obj, "t_plot_step", float, required=False)),
            number_ic=number_ic,
            seed=_get(obj, "seed", int, required=False, default=0),
            method=method,
            compile_command=_get(obj, "compile_command", str, required=False,
                                 default=DEFAULT_COMPILE_COMMAND),
            run_id=_get(obj, "run_id", str, required=False),
            created_at=_get(obj, "created_at", str, required=False),
            plot_vars=plot_vars,
            plot_svg=bool(obj.get("plot_svg", False)),
        )


@dataclass(frozen=True)
class BoxcountRequest:
    system_source: str
    system_name: str
    predicate_source: str
    region: InitRegion
    t_start: float
    t_final: float
    t_calc_step: float
    number_ic: int
    epsilon: float
    k: int
    seed: int
    method: str = METHOD_NATIVE
    compile_command: str = DEFAULT_COMPILE_COMMAND
    run_id: Optional[str] = None
    created_at: Optional[str] = None

    @staticmethod
    def from_dict(obj: dict) -> "BoxcountRequest":
        base = _boundary_common(obj)
        epsilon = _get(obj, "epsilon", float)
        _require(epsilon > 0, "epsilon must be positive")
        return BoxcountRequest(epsilon=epsilon, **base)


@dataclass(frozen=True)
class FdimRequest:
    system_source: str
    system_name: str
    predicate_source: str
    region: InitRegion
    t_start: float
    t_final: float
    t_calc_step: float
    number_ic: int
    eps_lo: float
    eps_hi: float
    n_epsilons: int
    k: int
    seed: int
    method: str = METHOD_NATIVE
    compile_command: str = DEFAULT_COMPILE_COMMAND
    run_id: Optional[str] = None
    created_at: Optional[str] = None

    @staticmethod
    def from_dict(obj: dict) -> "FdimRequest":
        base = _boundary_common(obj)
        rng = obj.get("epsilon_range")
        _require(isinstance(rng, (list, tuple)) and len(rng) == 2,
                 "epsilon_range must be [lo, hi]")
        lo, hi = float(rng[0]), float(rng[1])
        _require(0 < lo < hi, "epsilon_range must satisfy 0 < lo < hi")
        n_eps = _get(obj, "n_epsilons", int)
        _require(n_eps >= 2, "n_epsilons must be at least 2")
        return FdimRequest(eps_lo=lo, eps_hi=hi, n_epsilons=n_eps, **base)


def _boundary_common(obj: dict) -> dict:
    predicate = _get(obj, "predicate", str)
    _require(predicate.strip() != "", "predicate must not be empty")
    t_final = _get(obj, "t_final", float)
    t_start = _get(obj, "t_start", float, required=False, default=0.0)
    _require(t_final > t_start, "t_final must exceed t_start")
    h = _get(obj, "t_calc_step", float)
    _require(h > 0, "t_calc_step must be positive")
    number_ic = _get(obj, "number_ic", int)
    _require(number_ic >= 1, "number_ic must be positive")
    k = _get(obj, "k", int, required=False, default=2)
    _require(k >= 1, "k must be at least 1")
    method = _get(obj, "method", str, required=False, default=METHOD_NATIVE)
    _require(method in (METHOD_NATIVE, METHOD_PLUGIN),
             f"method must be {METHOD_NATIVE!r} or {METHOD_PLUGIN!r}")
    return dict(
        system_source=_get(obj, "system_source", str),
        system_name=_get(obj, "system_name", str, required=False, default="system"),
        predicate_source=predicate,
        region=_parse_region(obj),
        t_start=t_start,
        t_final=t_final,
        t_calc_step=h,
        number_ic=number_ic,
        k=k,
        seed=_get(obj, "seed", int, required=False, default=0),
        method=method,
        compile_command=_get(obj, "compile_command", str, required=False,
                             default=DEFAULT_COMPILE_COMMAND),
        run_id=_get(obj, "run_id", str, required=False),
        created_at=_get(obj, "created_at", str, required=False),
    )


# Run orchestration ----------------------------------------------------------


def _prepare(system_source, system_name, predicate_source, region) -> tuple[SystemDef, Optional[Predicate]]:
    sys = parse_system(system_source, system_name)
    region.matches(sys)
    pred = parse_predicate(predicate_source, sys) if predicate_source.strip() else None
    return sys, pred


def _make_cfg(req, t0: float, t1: float, stride: int) -> IntegratorConfig:
    if req.method == METHOD_PLUGIN:
        sys = parse_system(req.system_source, req.system_name)
        spec = build_plugin(sys, compile_command=req.compile_command)
        return IntegratorConfig(h=req.t_calc_step, t0=t0, t1=t1,
                                sample_stride=stride, method=METHOD_PLUGIN, plugin=spec)
    return IntegratorConfig(h=req.t_calc_step, t0=t0, t1=t1, sample_stride=stride)


def run_solve(
    req: SolveRequest,
    store_root: str,
    workers: int = 1,
    progress: ProgressFn | None = None,
    cancel: CancelFn | None = None,
) -> str:
    """Sample ICs, integrate the ensemble, persist the run; returns run_id."""
    sys, pred = _prepare(req.system_source, req.system_name, req.predicate_source, req.region)
    cfg = _make_cfg(req, req.t0, req.t1, req.sample_stride)
    ics = sample_ics(req.region, req.number_ic, req.seed)

    trajectories: list[Trajectory] = []
    for start in range(0, req.number_ic, _SOLVE_BATCH):
        if cancel is not None and cancel():
            raise JobCancelled("solve cancelled")
        stop = min(req.number_ic, start + _SOLVE_BATCH)
        batch = integrate_ensemble(sys, ics.points[start:stop], cfg, workers=workers)
        for traj in batch:
            traj.ic_index += start
        trajectories.extend(batch)
        if progress is not None:
            progress(stop, req.number_ic)

    extra_files: dict[str, str] = {}
    if req.plot_vars is not None:
        classes = _classes_for(sys, pred, trajectories)
        vx, vy = req.plot_vars
        extra_files[f"plot_{vx}_{vy}.csv"] = _projection_csv(sys, trajectories, classes, vx, vy)
        if req.plot_svg:
            extra_files[f"plot_{vx}_{vy}.svg"] = _projection_svg(sys, trajectories, classes, vx, vy)

    manifest = RunManifest(
        run_id=req.run_id or new_run_id(),
        created_at=req.created_at or utc_now(),
        system_source=req.system_source,
        system_name=req.system_name,
        predicate_source=req.predicate_source,
        region=req.region,
        cfg=cfg,
        seed=req.seed,
    )
    return save_run(store_root, manifest, trajectories=trajectories, extra_files=extra_files)


def run_boxcount(
    req: BoxcountRequest,
    store_root: str,
    workers: int = 1,
    progress: ProgressFn | None = None,
    cancel: CancelFn | None = None,
) -> tuple[str, BoxcountResult]:
    sys, pred = _prepare(req.system_source, req.system_name, req.predicate_source, req.region)
    cfg = _make_cfg(req, req.t_start, req.t_final, 1)
    ics = sample_ics(req.region, req.number_ic, req.seed)
    result = boxcount(
        sys, ics, pred, req.epsilon, req.t_final, cfg,
        k=req.k, seed=req.seed, workers=workers, progress=progress, cancel=cancel,
    )
    manifest = RunManifest(
        run_id=req.run_id or new_run_id(),
        created_at=req.created_at or utc_now(),
        system_source=req.system_source,
        system_name=req.system_name,
        predicate_source=req.predicate_source,
        region=req.region,
        cfg=cfg,
        seed=req.seed,
    )
    run_id = save_run(store_root, manifest, results=[result])
    return run_id, result


def run_fdim(
    req: FdimRequest,
    store_root: str,
    workers: int = 1,
    progress: ProgressFn | None = None,
    cancel: CancelFn | None = None,
) -> tuple[str, FdimResult]:
    sys, pred = _prepare(req.system_source, req.system_name, req.predicate_source, req.region)
    cfg = _make_cfg(req, req.t_start, req.t_final, 1)
    ics = sample_ics(req.region, req.number_ic, req.seed)
    result = fdimension(
        sys, ics, pred, (req.eps_lo, req.eps_hi), req.n_epsilons, req.t_final, cfg,
        k=req.k, seed=req.seed, workers=workers, progress=progress, cancel=cancel,
    )
    points_csv = "delta,fraction\n" + "".join(
        f"{d:.17g},{f:.17g}\n" for d, f in result.points
    )
    manifest = RunManifest(
        run_id=req.run_id or new_run_id(),
        created_at=req.created_at or utc_now(),
        system_source=req.system_source,
        system_name=req.system_name,
        predicate_source=req.predicate_source,
        region=req.region,
        cfg=cfg,
        seed=req.seed,
    )
    run_id = save_run(
        store_root, manifest, results=[result],
        extra_files={"fdim_points.csv": points_csv},
    )
    return run_id, result


# Projection plot emission ---------------------------------------------------


def _classes_for(sys, pred, trajectories) -> list[Optional[str]]:
    if pred is None:
        return [None] * len(trajectories)
    return [classify(sys, t, pred).value for t in trajectories]


def _var_indices(sys: SystemDef, vx: str, vy: str) -> tuple[int, int]:
    for v in (vx, vy):
        if v not in sys.state_vars:
            raise ValueError(f"unknown state variable {v!r}")
    return sys.state_vars.index(vx), sys.state_vars.index(vy)


def _projection_csv(sys, trajectories, classes, vx, vy) -> str:
    ix, iy = _var_indices(sys, vx, vy)
    lines = [f"ic_index,class,t,{vx},{vy}"]
    for traj, cls in zip(trajectories, classes):
        label = cls if cls is not None else ""
        for t, state in zip(traj.times, traj.states):
            lines.append(f"{traj.ic_index},{label},{t:.17g},{state[ix]:.17g},{state[iy]:.17g}")
    return "\n".join(lines) + "\n"


_CLASS_COLORS = {"true": "#1f77b4", "false": "#d62728",
                 "untestable": "#999999", None: "#444444"}


def _projection_svg(sys, trajectories, classes, vx, vy, width=800, height=600) -> str:
    ix, iy = _var_indices(sys, vx, vy)
    xs = np.concatenate([t.states[:, ix] for t in trajectories if len(t.times)])
    ys = np.concatenate([t.states[:, iy] for t in trajectories if len(t.times)])
    x_lo, x_hi = float(xs.min()), float(xs.max())
    y_lo, y_hi = float(ys.min()), float(ys.max())
    x_span = (x_hi - x_lo) or 1.0
    y_span = (y_hi - y_lo) or 1.0
    margin = 20

    def sx(v):
        return margin + (v - x_lo) / x_span * (width - 2 * margin)

    def sy(v):
        return height - margin - (v - y_lo) / y_span * (height - 2 * margin)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    for traj, cls in zip(trajectories, classes):
        color = _CLASS_COLORS.get(cls, "#444444")
        pts = " ".join(
            f"{sx(s[ix]):.2f},{sy(s[iy]):.2f}" for s in traj.states
        )
        parts.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="0.6" points="{pts}"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
