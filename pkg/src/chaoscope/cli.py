"""Command-line interface.

Flags mirror the session-variable names of the interactive workflow
(--t-range, --t-calc-step, --t-plot-step, --number-ic, --epsilon-range,
--n-epsilons) so a recorded session transcribes mechanically. A JSON config
file can stand in for flags; explicit flags win. Every error prints a single
line with the prefix "error:" and exits nonzero.
"""
from __future__ import annotations

import argparse
import json
import os
import socket
import sys as _sys
import time
from typing import Sequence

import numpy as np

from .errors import ChaoscopeError
from .fractal import (
    BoxCountSeries,
    FractalFamily,
    box_count_points,
    estimate_dimension,
    family_counts,
)
from .integrate import (
    DEFAULT_COMPILE_COMMAND,
    IntegratorConfig,
    METHOD_NATIVE,
    METHOD_PLUGIN,
    build_plugin,
    integrate,
    run_plugin,
)
from .pipeline import (
    BoxcountRequest,
    FdimRequest,
    SolveRequest,
    run_boxcount,
    run_fdim,
    run_solve,
)
from .store import ENV_STORE, list_runs
from .sysdsl import parse_system

DEFAULT_STORE = "./runs"


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # one-line machine-parseable errors
        print(f"error: {message}", file=_sys.stderr)
        raise SystemExit(2)


def _parse_range(text: str) -> tuple[float, float]:
    """Parse 'a..b' into a float pair."""
    parts = text.split("..", 1)
    if len(parts) != 2:
        raise ValueError(f"expected a range like 0..16, got {text!r}")
    return float(parts[0].strip()), float(parts[1].strip())


def _parse_region(text: str) -> dict:
    """Parse 'x=-1.001..1.001,y=...,z=...' into InitRegion JSON."""
    ranges = []
    for item in text.split(","):
        if "=" not in item:
            raise ValueError(f"bad region component {item!r}; expected name=lo..hi")
        name, rng = item.split("=", 1)
        lo, hi = _parse_range(rng)
        ranges.append({"var": name.strip(), "lo": lo, "hi": hi})
    return {"ranges": ranges}


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    if not isinstance(obj, dict):
        raise ValueError("config file must contain a JSON object")
    return obj


def _opt(args, name: str, config: dict, default=None):
    value = getattr(args, name, None)
    if value is not None:
        return value
    if name in config:
        return config[name]
    return default


def _store_root(args, config: dict) -> str:
    return (
        getattr(args, "store", None)
        or config.get("store")
        or os.environ.get(ENV_STORE)
        or DEFAULT_STORE
    )


def _read_system(args, config: dict) -> tuple[str, str]:
    path = _opt(args, "system", config)
    if not path:
        raise ValueError("--system is required")
    with open(path, "r", encoding="utf-8") as fh:
        source = fh.read()
    name = _opt(args, "name", config) or os.path.splitext(os.path.basename(path))[0]
    return source, name


def _apply_params(source: str, params: Sequence[str] | None) -> str:
    """Apply --param name=value overrides by rebinding and re-printing."""
    if not params:
        return source
    from .sysdsl import format_system

    system = parse_system(source)
    overrides = {}
    for item in params:
        if "=" not in item:
            raise ValueError(f"bad --param {item!r}; expected name=value")
        name, value = item.split("=", 1)
        overrides[name.strip()] = float(value)
    return format_system(system.rebind(**overrides))


def _common_payload(args, config) -> dict:
    source, name = _read_system(args, config)
    source = _apply_params(source, _opt(args, "param", config))
    region_text = _opt(args, "region", config)
    if not region_text:
        raise ValueError("--region is required")
    region = _parse_region(region_text) if isinstance(region_text, str) else region_text
    return {
        "system_source": source,
        "system_name": name,
        "region": region,
        "t_calc_step": _opt(args, "t_calc_step", config),
        "number_ic": _opt(args, "number_ic", config),
        "seed": int(_opt(args, "seed", config, 0)),
        "method": _opt(args, "method", config, METHOD_NATIVE),
        "compile_command": _opt(args, "compile_command", config, DEFAULT_COMPILE_COMMAND),
        "run_id": _opt(args, "run_id", config),
    }


def cmd_solve(args) -> int:
    config = _load_config(args.config)
    payload = _common_payload(args, config)
    t_range = _opt(args, "t_range", config)
    if t_range is None:
        raise ValueError("--t-range is required")
    payload["t_range"] = list(_parse_range(t_range)) if isinstance(t_range, str) else t_range
    payload["t_plot_step"] = _opt(args, "t_plot_step", config)
    payload["predicate"] = _opt(args, "predicate", config, "")
    plot_vars = _opt(args, "plot_vars", config)
    if plot_vars:
        payload["plot_vars"] = plot_vars.split(",") if isinstance(plot_vars, str) else plot_vars
        payload["plot_svg"] = bool(_opt(args, "plot_svg", config, False))
    req = SolveRequest.from_dict(payload)
    store = _store_root(args, config)
    started = time.perf_counter()
    run_id = run_solve(req, store, workers=int(_opt(args, "workers", config, 1)))
    elapsed = time.perf_counter() - started
    print(f"run_id: {run_id}")
    print(f"trajectories: {req.number_ic}")
    print(f"wall_time_s: {elapsed:.3f}")
    return 0


def cmd_boxcount(args) -> int:
    config = _load_config(args.config)
    payload = _common_payload(args, config)
    payload["predicate"] = _opt(args, "predicate", config)
    payload["t_final"] = _opt(args, "t_final", config)
    payload["t_start"] = float(_opt(args, "t_start", config, 0.0))
    payload["epsilon"] = _opt(args, "epsilon", config)
    payload["k"] = int(_opt(args, "k", config, 2))
    req = BoxcountRequest.from_dict(payload)
    store = _store_root(args, config)
    run_id, result = run_boxcount(req, store, workers=int(_opt(args, "workers", config, 1)))
    print(f"run_id: {run_id}")
    print(
        f"From the {result.n_testable} points (that were testable), "
        f"{result.n_boundary} of them were close to the boundary."
    )
    print(f"epsilon: {result.epsilon:.17g}")
    print(f"delta: {result.delta:.17g}")
    print(f"fraction: {result.fraction:.17g}")
    print(f"excluded: {result.n_excluded}")
    return 0


def cmd_fdim(args) -> int:
    config = _load_config(args.config)
    payload = _common_payload(args, config)
    payload["predicate"] = _opt(args, "predicate", config)
    payload["t_final"] = _opt(args, "t_final", config)
    payload["t_start"] = float(_opt(args, "t_start", config, 0.0))
    eps_range = _opt(args, "epsilon_range", config)
    if eps_range is None:
        raise ValueError("--epsilon-range is required")
    payload["epsilon_range"] = (
        list(_parse_range(eps_range)) if isinstance(eps_range, str) else eps_range
    )
    payload["n_epsilons"] = _opt(args, "n_epsilons", config)
    payload["k"] = int(_opt(args, "k", config, 2))
    req = FdimRequest.from_dict(payload)
    store = _store_root(args, config)
    run_id, result = run_fdim(req, store, workers=int(_opt(args, "workers", config, 1)))
    print(f"run_id: {run_id}")
    print(f"Fractal dimension = {result.d_B:.15g}")
    print(f"statistical error = {result.se_percent:.15g} %")
    print(f"linear correlation = {result.pearson_r:.15g}")
    print(f"alpha: {result.alpha:.15g}")
    for delta, fraction in result.points:
        print(f"point: delta={delta:.17g} fraction={fraction:.17g}")
    if result.dropped:
        print(f"dropped_epsilons: {', '.join(f'{e:.3g}' for e in result.dropped)}")
    return 0


def cmd_fractal(args) -> int:
    config = _load_config(args.config)
    points_path = _opt(args, "points", config)
    if points_path:
        deltas_text = _opt(args, "deltas", config)
        if not deltas_text:
            raise ValueError("--deltas is required with --points")
        deltas = sorted(
            (float(d) for d in str(deltas_text).split(",")), reverse=True
        )
        pts = _read_points_csv(points_path)
        series = BoxCountSeries(
            tuple((d, box_count_points(pts, d)) for d in deltas)
        )
    else:
        b = _opt(args, "branches", config)
        s = _opt(args, "scale", config)
        M = _opt(args, "iterations", config)
        if b is None or s is None or M is None:
            raise ValueError("provide --branches, --scale and --iterations (or --points)")
        series = family_counts(FractalFamily(int(b), int(s), int(M)))
    est = estimate_dimension(series)
    print(f"dimension: {est.d:.15g}")
    print(f"pearson_r: {est.pearson_r:.15g}")
    print(f"se_slope: {est.se_slope:.15g}")
    out_csv = _opt(args, "out_csv", config)
    if out_csv:
        with open(out_csv, "w", encoding="ascii") as fh:
            fh.write("delta,count\n")
            for d, c in series.points:
                fh.write(f"{d:.17g},{c}\n")
        print(f"series_csv: {out_csv}")
    return 0


def _read_points_csv(path: str) -> np.ndarray:
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                rows.append([float(v) for v in line.split(",")])
            except ValueError:
                raise ValueError(f"unparseable point at {path}:{lineno}") from None
    if not rows:
        raise ValueError(f"no points in {path}")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValueError(f"inconsistent column count in {path}")
    return np.asarray(rows)


def cmd_bench(args) -> int:
    config = _load_config(args.config)
    source, name = _read_system(args, config)
    source = _apply_params(source, _opt(args, "param", config))
    system = parse_system(source, name)
    reps = int(_opt(args, "repetitions", config, 0) or 0)
    if reps < 1:
        raise ValueError("--repetitions must be a positive integer")
    t_range = _opt(args, "t_range", config)
    if t_range is None:
        raise ValueError("--t-range is required")
    t0, t1 = _parse_range(t_range) if isinstance(t_range, str) else t_range
    h = _opt(args, "t_calc_step", config)
    if h is None:
        raise ValueError("--t-calc-step is required")
    x0_text = _opt(args, "x0", config)
    if not x0_text:
        raise ValueError("--x0 is required")
    x0 = np.array([float(v) for v in str(x0_text).split(",")])
    cfg = IntegratorConfig(h=float(h), t0=t0, t1=t1, sample_stride=10**9)

    started = time.perf_counter()
    for _ in range(reps):
        integrate(system, x0, cfg)
    native_s = (time.perf_counter() - started) / reps
    print(f"method=native_rk5 seconds_per_trajectory={native_s:.6f} repetitions={reps}")

    try:
        spec = build_plugin(
            system,
            compile_command=_opt(args, "compile_command", config, DEFAULT_COMPILE_COMMAND),
        )
        plugin_cfg = IntegratorConfig(
            h=float(h), t0=t0, t1=t1, sample_stride=10**9,
            method=METHOD_PLUGIN, plugin=spec,
        )
        started = time.perf_counter()
        for _ in range(reps):
            run_plugin(spec, x0, plugin_cfg)
        plugin_s = (time.perf_counter() - started) / reps
        print(f"method=plugin seconds_per_trajectory={plugin_s:.6f} repetitions={reps}")
    except ChaoscopeError as exc:
        print(f"method=plugin skipped ({exc})")
    return 0


def cmd_list(args) -> int:
    config = _load_config(args.config)
    for run_id, created_at, system_name in list_runs(_store_root(args, config)):
        print(f"{run_id}\t{created_at}\t{system_name}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    config = _load_config(args.config)
    host = _opt(args, "host", config, "127.0.0.1")
    port = int(_opt(args, "port", config, 8765))
    # probe the port up front so bind failures surface as one-line errors
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.bind((host, port))
    except OSError as exc:
        raise ValueError(f"cannot bind {host}:{port}: {exc}") from exc
    finally:
        probe.close()
    app = create_app(
        store_root=_store_root(args, config),
        workers=int(_opt(args, "workers", config, 1)),
        cors_origins=[_opt(args, "cors_origin", config, "*")],
    )
    uvicorn.run(app, host=host, port=port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="chaoscope",
                     description="Fractal boundary workbench for dynamical systems")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_boundary=False):
        p.add_argument("--config", help="JSON config file standing in for flags")
        p.add_argument("--store", help=f"store root (env {ENV_STORE}, default {DEFAULT_STORE})")
        p.add_argument("--workers", type=int, help="ensemble parallelism cap (default 1)")
        p.add_argument("--system", help="system definition file")
        p.add_argument("--name", help="system name (default: file stem)")
        p.add_argument("--param", action="append",
                       help="override a system parameter, name=value (repeatable)")
        p.add_argument("--region", help="initial-condition region: x=lo..hi,y=lo..hi,...")
        p.add_argument("--t-calc-step", dest="t_calc_step", type=float,
                       help="integration step h")
        p.add_argument("--number-ic", dest="number_ic", type=int,
                       help="number of initial conditions")
        p.add_argument("--seed", type=int, help="RNG seed (default 0)")
        p.add_argument("--method", choices=[METHOD_NATIVE, METHOD_PLUGIN],
                       help="integration method (default native_rk5)")
        p.add_argument("--compile-command", dest="compile_command",
                       help="plugin compile command template with {src} and {exe}")
        p.add_argument("--run-id", dest="run_id", help="explicit run id")
        if with_boundary:
            p.add_argument("--predicate", help="classification predicate, e.g. 'x < 0'")
            p.add_argument("--t-final", dest="t_final", type=float,
                           help="final integration time")
            p.add_argument("--t-start", dest="t_start", type=float, help="start time (default 0)")
            p.add_argument("--k", type=int, help="perturbations per cell (default 2)")

    p_solve = sub.add_parser("solve", help="integrate an ensemble and store the run")
    common(p_solve)
    p_solve.add_argument("--predicate", help="orbit coloring predicate")
    p_solve.add_argument("--t-range", dest="t_range", help="time range, e.g. 0..37")
    p_solve.add_argument("--t-plot-step", dest="t_plot_step", type=float,
                         help="recording step (multiple of --t-calc-step)")
    p_solve.add_argument("--plot-vars", dest="plot_vars",
                         help="emit projection data for two variables, e.g. x,z")
    p_solve.add_argument("--plot-svg", dest="plot_svg", action="store_true",
                         help="also emit a static SVG of the projection")
    p_solve.set_defaults(func=cmd_solve)

    p_box = sub.add_parser("boxcount", help="boundary fraction at one perturbation scale")
    common(p_box, with_boundary=True)
    p_box.add_argument("--epsilon", type=float, help="perturbation half-edge")
    p_box.set_defaults(func=cmd_boxcount)

    p_fdim = sub.add_parser("fdim", help="boundary fractal dimension over an epsilon ladder")
    common(p_fdim, with_boundary=True)
    p_fdim.add_argument("--epsilon-range", dest="epsilon_range",
                        help="perturbation range, e.g. 2e-7..1e-6")
    p_fdim.add_argument("--n-epsilons", dest="n_epsilons", type=int,
                        help="number of log-spaced epsilon values")
    p_fdim.set_defaults(func=cmd_fdim)

    p_frac = sub.add_parser("fractal", help="dimension of an analytic family or a point set")
    p_frac.add_argument("--config", help="JSON config file standing in for flags")
    p_frac.add_argument("--branches", "-b", type=int, help="pieces per parent")
    p_frac.add_argument("--scale", "-s", type=int, help="scale divisor per iteration")
    p_frac.add_argument("--iterations", "-M", type=int, help="iteration count")
    p_frac.add_argument("--points", help="CSV of points in the unit hypercube")
    p_frac.add_argument("--deltas", help="comma-separated cell edges for --points")
    p_frac.add_argument("--out-csv", dest="out_csv", help="write the series as delta,count CSV")
    p_frac.set_defaults(func=cmd_fractal)

    p_bench = sub.add_parser("bench", help="seconds per trajectory, native vs plugin")
    common(p_bench)
    p_bench.add_argument("--t-range", dest="t_range", help="time range, e.g. 0..11")
    p_bench.add_argument("--repetitions", "-R", type=int, help="number of repetitions")
    p_bench.add_argument("--x0", help="initial condition, comma-separated")
    p_bench.set_defaults(func=cmd_bench)

    p_list = sub.add_parser("list", help="list stored runs, newest first")
    p_list.add_argument("--config", help="JSON config file standing in for flags")
    p_list.add_argument("--store", help="store root")
    p_list.set_defaults(func=cmd_list)

    p_serve = sub.add_parser("serve", help="start the HTTP service")
    p_serve.add_argument("--config", help="JSON config file standing in for flags")
    p_serve.add_argument("--store", help="store root")
    p_serve.add_argument("--workers", type=int, help="ensemble parallelism cap")
    p_serve.add_argument("--host", help="bind address (default 127.0.0.1)")
    p_serve.add_argument("--port", type=int, help="bind port (default 8765)")
    p_serve.add_argument("--cors-origin", dest="cors_origin",
                         help="allowed UI origin (default *)")
    p_serve.set_defaults(func=cmd_serve)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ChaoscopeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
