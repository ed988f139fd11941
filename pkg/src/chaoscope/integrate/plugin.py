"""External integrator plugin: emit kernel + driver C sources, compile,
exchange data through files, treat the executable as a black box.

Protocol (documented in the README):
  input file   line 1: n
               line 2: t0 t1 h stride
               line 3: x0[0] ... x0[n-1]
  output file  one line per recorded sample: t x[0] ... x[n-1]
All reals use 17 significant digits. The executable takes the input and
output paths as its two arguments, exits 0 on success and nonzero with a
one-line reason on stderr otherwise.
"""
from __future__ import annotations

import os
import shlex
import shutil
import string
import subprocess
import tempfile
from typing import Sequence

import numpy as np

from ..errors import (
    CompileError,
    CompilerNotFoundError,
    HandshakeError,
    PluginExecutionError,
    PluginOutputError,
)
from ..sysdsl import SystemDef, emit_kernel_source
from . import tableau as tb
from .native import rk5_step, step_plan
from .types import IntegratorConfig, PluginSpec, Trajectory, TrajectoryStatus

DEFAULT_COMPILE_COMMAND = "cc -O2 -ffp-contract=off -o {exe} {src} -lm"

KERNEL_FILE = "derivs.c"
DRIVER_FILE = "rk5_driver.c"
EXECUTABLE = "rk5_plugin"

_HANDSHAKE_RTOL = 1e-12
_PROBE_H = 1e-3

_DRIVER_TEMPLATE = string.Template(r"""/* fixed-step RK5 driver; reads an input file, writes sampled states */
#include <stdio.h>
#include <stdlib.h>
#include <string.h>
#include <math.h>

void derivs(double t, const double *x, double *dxdt);

#define MAX_DIM 64

static const double C2 = $C2, C3 = $C3, C4 = $C4, C5 = $C5, C6 = $C6;
static const double A21 = $A21;
static const double A31 = $A31, A32 = $A32;
static const double A41 = $A41, A42 = $A42, A43 = $A43;
static const double A51 = $A51, A52 = $A52, A53 = $A53, A54 = $A54;
static const double A61 = $A61, A62 = $A62, A63 = $A63, A64 = $A64, A65 = $A65;
static const double B1 = $B1, B3 = $B3, B4 = $B4, B6 = $B6;
static const double GRID_RTOL = $GRID_RTOL;

static void ck_step(double t, const double *x, double h, int n, double *out)
{
    double k1[MAX_DIM], k2[MAX_DIM], k3[MAX_DIM], k4[MAX_DIM], k5[MAX_DIM],
           k6[MAX_DIM], tmp[MAX_DIM];
    int i;
    derivs(t, x, k1);
    for (i = 0; i < n; ++i) tmp[i] = x[i] + h * (A21 * k1[i]);
    derivs(t + C2 * h, tmp, k2);
    for (i = 0; i < n; ++i) tmp[i] = x[i] + h * (A31 * k1[i] + A32 * k2[i]);
    derivs(t + C3 * h, tmp, k3);
    for (i = 0; i < n; ++i) tmp[i] = x[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
    derivs(t + C4 * h, tmp, k4);
    for (i = 0; i < n; ++i) tmp[i] = x[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
    derivs(t + C5 * h, tmp, k5);
    for (i = 0; i < n; ++i) tmp[i] = x[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
    derivs(t + C6 * h, tmp, k6);
    for (i = 0; i < n; ++i) out[i] = x[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B6 * k6[i]);
}

static int all_finite(const double *x, int n)
{
    int i;
    for (i = 0; i < n; ++i)
        if (!isfinite(x[i])) return 0;
    return 1;
}

static void write_sample(FILE *out, double t, const double *x, int n)
{
    int i;
    fprintf(out, "%.17g", t);
    for (i = 0; i < n; ++i) fprintf(out, " %.17g", x[i]);
    fputc('\n', out);
}

int main(int argc, char **argv)
{
    FILE *in, *out;
    int n, i, alive = 1, partial;
    long stride, m, j;
    double t0, t1, h, span;
    double x[MAX_DIM], nxt[MAX_DIM];

    if (argc != 3) {
        fprintf(stderr, "usage: %s <input-file> <output-file>\n", argv[0]);
        return 2;
    }
    in = fopen(argv[1], "r");
    if (!in) { fprintf(stderr, "cannot open input file %s\n", argv[1]); return 1; }
    if (fscanf(in, "%d", &n) != 1 || n < 1 || n > MAX_DIM) {
        fprintf(stderr, "bad dimension line (need 1 <= n <= %d)\n", MAX_DIM);
        return 1;
    }
    if (fscanf(in, "%lf %lf %lf %ld", &t0, &t1, &h, &stride) != 4
        || h <= 0.0 || stride < 1 || t1 <= t0) {
        fprintf(stderr, "bad configuration line\n");
        return 1;
    }
    for (i = 0; i < n; ++i) {
        if (fscanf(in, "%lf", &x[i]) != 1) {
            fprintf(stderr, "bad initial state line\n");
            return 1;
        }
    }
    fclose(in);

    out = fopen(argv[2], "w");
    if (!out) { fprintf(stderr, "cannot open output file %s\n", argv[2]); return 1; }

    span = t1 - t0;
    m = (long)floor(span / h + 0.5);
    if (fabs(span - (double)m * h) > GRID_RTOL * h) m = (long)floor(span / h);
    partial = (t1 - (t0 + (double)m * h)) > GRID_RTOL * h;

    write_sample(out, t0, x, n);
    for (j = 1; j <= m; ++j) {
        ck_step(t0 + (double)(j - 1) * h, x, h, n, nxt);
        if (!all_finite(nxt, n)) { alive = 0; break; }
        memcpy(x, nxt, (size_t)n * sizeof(double));
        if (j % stride == 0) write_sample(out, t0 + (double)j * h, x, n);
    }
    if (alive && partial) {
        double h2 = t1 - (t0 + (double)m * h);
        ck_step(t0 + (double)m * h, x, h2, n, nxt);
        if (all_finite(nxt, n)) {
            memcpy(x, nxt, (size_t)n * sizeof(double));
            write_sample(out, t1, x, n);
        } else {
            alive = 0;
        }
    } else if (alive && m % stride != 0) {
        write_sample(out, t1, x, n);
    }
    if (fclose(out) != 0) { fprintf(stderr, "write failure on output file\n"); return 1; }
    return 0;
}
""")


def driver_source() -> str:
    """The fixed driver source with tableau constants substituted in."""
    values = {
        name: f"{getattr(tb, name):.17g}"
        for name in ("C2", "C3", "C4", "C5", "C6", "A21", "A31", "A32", "A41", "A42",
                     "A43", "A51", "A52", "A53", "A54", "A61", "A62", "A63", "A64",
                     "A65", "B1", "B3", "B4", "B6")
    }
    values["GRID_RTOL"] = "1e-9"
    return _DRIVER_TEMPLATE.substitute(values)


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def build_plugin(
    sys: SystemDef,
    dialect: str = "c99",
    compile_command: str = DEFAULT_COMPILE_COMMAND,
    workdir: str | None = None,
) -> PluginSpec:
    """Emit kernel and driver sources, compile them, verify the handshake."""
    if workdir is None:
        workdir = tempfile.mkdtemp(prefix="chaoscope-plugin-")
    os.makedirs(workdir, exist_ok=True)
    kernel_path = os.path.join(workdir, KERNEL_FILE)
    with open(kernel_path, "w", encoding="ascii") as fh:
        fh.write(emit_kernel_source(sys, dialect))
    with open(os.path.join(workdir, DRIVER_FILE), "w", encoding="ascii") as fh:
        fh.write(driver_source())

    command = compile_command.format(src=f"{KERNEL_FILE} {DRIVER_FILE}", exe=EXECUTABLE)
    argv = shlex.split(command)
    if not argv or shutil.which(argv[0]) is None:
        raise CompilerNotFoundError(f"compiler not found: {argv[0] if argv else command!r}")
    proc = subprocess.run(argv, cwd=workdir, capture_output=True, text=True)
    if proc.returncode != 0:
        raise CompileError(f"compile command failed (exit {proc.returncode})",
                           diagnostics=proc.stderr.strip())
    exe_path = os.path.join(workdir, EXECUTABLE)
    if not os.path.exists(exe_path):
        raise CompileError(f"compiler succeeded but {EXECUTABLE} was not produced")

    spec = PluginSpec(
        kernel_source_path=kernel_path,
        compile_command=compile_command,
        executable_path=exe_path,
        workdir=workdir,
    )
    _verify_handshake(sys, spec)
    return spec


def _verify_handshake(sys: SystemDef, spec: PluginSpec) -> None:
    """Run a one-step probe through the executable and compare to the native step."""
    probe = np.array([0.5 + 0.25 * i for i in range(sys.dimension)])
    cfg = IntegratorConfig(h=_PROBE_H, t0=0.0, t1=_PROBE_H, sample_stride=1,
                           method="plugin", plugin=spec)
    traj = run_plugin(spec, probe, cfg)
    if not traj.status.completed or len(traj.times) != 2:
        raise HandshakeError("probe run did not produce a one-step trajectory")
    native = rk5_step(sys, 0.0, probe, _PROBE_H)
    dev = _max_rel_dev(traj.states[-1], native)
    if dev > _HANDSHAKE_RTOL:
        raise HandshakeError(
            f"probe step deviates from native by {dev:.3e} (> {_HANDSHAKE_RTOL:.0e})"
        )


def _max_rel_dev(a: np.ndarray, b: np.ndarray) -> float:
    denom = np.maximum(np.maximum(np.abs(a), np.abs(b)), 1e-300)
    return float(np.max(np.abs(a - b) / denom))


def run_plugin(
    plugin: PluginSpec,
    x0: Sequence[float],
    cfg: IntegratorConfig,
    timeout: float = 120.0,
) -> Trajectory:
    """Execute the plugin on one initial condition and parse its output file.

    The executable is used purely through the file protocol; each invocation
    works in its own temporary directory so concurrent calls are safe.
    """
    x0 = np.asarray(x0, dtype=float)
    if not os.path.exists(plugin.executable_path):
        raise PluginExecutionError(f"plugin executable missing: {plugin.executable_path}")

    with tempfile.TemporaryDirectory(prefix="run-", dir=plugin.workdir) as rundir:
        in_path = os.path.join(rundir, "rk5.in")
        out_path = os.path.join(rundir, "rk5.out")
        with open(in_path, "w", encoding="ascii") as fh:
            fh.write(f"{len(x0)}\n")
            fh.write(f"{_fmt(cfg.t0)} {_fmt(cfg.t1)} {_fmt(cfg.h)} {cfg.sample_stride}\n")
            fh.write(" ".join(_fmt(v) for v in x0) + "\n")
        try:
            proc = subprocess.run(
                [plugin.executable_path, in_path, out_path],
                capture_output=True, text=True, timeout=timeout,
            )
        except subprocess.TimeoutExpired as exc:
            raise PluginExecutionError(
                f"plugin timed out after {timeout} s"
            ) from exc
        if proc.returncode != 0:
            reason = proc.stderr.strip().splitlines()
            reason = reason[0] if reason else f"exit status {proc.returncode}"
            raise PluginExecutionError(f"plugin failed: {reason}")
        times, states = _parse_output(out_path, len(x0))

    return _to_trajectory(times, states, cfg)


def _parse_output(path: str, n: int) -> tuple[list[float], list[list[float]]]:
    times: list[float] = []
    states: list[list[float]] = []
    if not os.path.exists(path):
        raise PluginOutputError("plugin produced no output file", 0)
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            fields = line.split()
            if len(fields) != n + 1:
                raise PluginOutputError(
                    f"expected {n + 1} fields, found {len(fields)}", lineno
                )
            try:
                values = [float(f) for f in fields]
            except ValueError:
                raise PluginOutputError("unparseable numeric field", lineno) from None
            times.append(values[0])
            states.append(values[1:])
    if not times:
        raise PluginOutputError("plugin output file is empty", 0)
    return times, states


def _to_trajectory(times: list[float], states: list[list[float]], cfg: IntegratorConfig) -> Trajectory:
    t_arr = np.asarray(times)
    s_arr = np.asarray(states)
    if len(t_arr) > 1 and not np.all(np.diff(t_arr) > 0):
        raise PluginOutputError("sample times are not strictly increasing", 0)
    completed = abs(t_arr[-1] - cfg.t1) <= 1e-9 * cfg.h
    if completed:
        status = TrajectoryStatus(completed=True)
    else:
        status = TrajectoryStatus(
            completed=False,
            reason="plugin stopped before t1 (non-finite state)",
            last_good_time=float(t_arr[-1]),
        )
    return Trajectory(ic_index=0, times=t_arr, states=s_arr, status=status)


def expected_sample_count(cfg: IntegratorConfig) -> int:
    """Recorded sample count for a completed run under this configuration."""
    m, partial = step_plan(cfg.t0, cfg.t1, cfg.h)
    count = m // cfg.sample_stride + 1
    if partial or m % cfg.sample_stride != 0:
        count += 1
    return count
