"""Boundary-cell detection and fractal dimension of basin boundaries.

Each sampled initial condition is the center of a cell of half-edge epsilon.
The cell's classification set is the asymptotic class of the base orbit plus
k orbits started from uniform random perturbations inside the cell; the cell
sits on the boundary when those classes disagree. Regressing the boundary
fraction against the normalized cell edge in log-log space yields the
boundary's fractal dimension.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .errors import BoundaryError, DomainError, JobCancelled
from .fractal import fit_loglog
from .integrate import IntegratorConfig, Trajectory, integrate_final_states
from .sysdsl import Predicate, SystemDef, eval_predicate

_IC_BATCH = 512  # base ICs per ensemble batch; progress/cancel granularity


@dataclass(frozen=True)
class InitRegion:
    """Axis-aligned box of initial conditions, one (name, lo, hi) per state var."""

    ranges: tuple[tuple[str, float, float], ...]

    def __post_init__(self):
        for name, lo, hi in self.ranges:
            if not lo <= hi:
                raise ValueError(f"axis {name!r}: lo={lo!r} exceeds hi={hi!r}")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _, _ in self.ranges)

    @property
    def lows(self) -> np.ndarray:
        return np.array([lo for _, lo, _ in self.ranges])

    @property
    def highs(self) -> np.ndarray:
        return np.array([hi for _, _, hi in self.ranges])

    @property
    def longest_edge(self) -> float:
        return float(max(hi - lo for _, lo, hi in self.ranges))

    def matches(self, sys: SystemDef) -> None:
        if self.names != sys.state_vars:
            raise ValueError(
                f"region axes {self.names} do not match system state variables "
                f"{sys.state_vars}"
            )

    def to_json(self) -> dict:
        return {
            "ranges": [
                {"var": name, "lo": lo, "hi": hi} for name, lo, hi in self.ranges
            ]
        }

    @staticmethod
    def from_json(obj: dict) -> "InitRegion":
        return InitRegion(
            tuple((r["var"], float(r["lo"]), float(r["hi"])) for r in obj["ranges"])
        )


@dataclass(frozen=True)
class ICSet:
    region: InitRegion
    seed: int
    count: int
    points: np.ndarray  # (count, n)


def sample_ics(region: InitRegion, count: int, seed: int) -> ICSet:
    """Draw initial conditions uniformly per axis; a pure function of
    (region, seed, count), independent of any worker configuration."""
    if count < 1:
        raise ValueError("count must be positive")
    rng = np.random.default_rng(np.random.SeedSequence(seed % 2**64))
    u = rng.random((count, len(region.ranges)))
    lows = region.lows
    points = lows + u * (region.highs - lows)
    return ICSet(region=region, seed=seed, count=count, points=points)


class Classification(enum.Enum):
    CLASS_TRUE = "true"
    CLASS_FALSE = "false"
    UNTESTABLE = "untestable"


def classify(sys: SystemDef, traj: Trajectory, p: Predicate) -> Classification:
    """Asymptotic class of an orbit: the predicate at its final recorded state.

    Failed trajectories are untestable, as are predicate domain errors; the
    failure reason lives on Trajectory.status.
    """
    if not traj.status.completed:
        return Classification.UNTESTABLE
    try:
        value = eval_predicate(p, sys, traj.final_state)
    except DomainError:
        return Classification.UNTESTABLE
    return Classification.CLASS_TRUE if value else Classification.CLASS_FALSE


@dataclass(frozen=True)
class BoxcountResult:
    epsilon: float
    delta: float
    n_testable: int
    n_boundary: int
    n_excluded: int

    def __post_init__(self):
        if self.n_boundary > self.n_testable:
            raise ValueError("n_boundary cannot exceed n_testable")

    @property
    def fraction(self) -> float:
        return self.n_boundary / self.n_testable

    def to_json(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "delta": self.delta,
            "n_testable": self.n_testable,
            "n_boundary": self.n_boundary,
            "n_excluded": self.n_excluded,
            "fraction": self.fraction,
        }


@dataclass(frozen=True)
class FdimResult:
    D: int
    alpha: float
    d_B: float
    se_percent: float
    pearson_r: float
    intercept: float
    points: tuple[tuple[float, float], ...]  # (delta, fraction), one per epsilon
    dropped: tuple[float, ...] = ()  # epsilons excluded for lack of boundary cells

    def to_json(self) -> dict:
        return {
            "D": self.D,
            "alpha": self.alpha,
            "d_B": self.d_B,
            "se_percent": self.se_percent,
            "pearson_r": self.pearson_r,
            "intercept": self.intercept,
            "points": [{"delta": d, "fraction": f} for d, f in self.points],
            "dropped_epsilons": list(self.dropped),
        }


def perturbations(base: np.ndarray, epsilon: float, k: int, seed: int, index: int) -> np.ndarray:
    """k points uniform in the half-edge-epsilon cube centered on base.

    The unit offsets are a pure function of (seed, index, copy index), so the
    same seed yields nested perturbation sets across epsilon scales.
    """
    rng = np.random.default_rng(np.random.SeedSequence([seed % 2**64, index]))
    u = rng.uniform(-1.0, 1.0, size=(k, base.shape[0]))
    return base + epsilon * u


def boxcount(
    sys: SystemDef,
    ics: ICSet,
    p: Predicate,
    epsilon: float,
    t_final: float,
    cfg: IntegratorConfig,
    k: int = 2,
    seed: int = 0,
    workers: int = 1,
    progress: Callable[[int, int], None] | None = None,
    cancel: Callable[[], bool] | None = None,
) -> BoxcountResult:
    """Classify every base cell as boundary / interior / untestable.

    A cell is testable when the base orbit and all k perturbed orbits
    integrate successfully; it is a boundary cell when their classes are not
    all equal. delta is epsilon normalized by the longest region edge.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if k < 1:
        raise ValueError("k must be >= 1")
    if t_final <= cfg.t0:
        raise ValueError("t_final must exceed cfg.t0")
    ics.region.matches(sys)
    run_cfg = replace(cfg, t1=t_final)

    count = ics.count
    n = sys.dimension
    n_testable = 0
    n_boundary = 0

    for start in range(0, count, _IC_BATCH):
        if cancel is not None and cancel():
            raise JobCancelled("boxcount cancelled")
        stop = min(count, start + _IC_BATCH)
        batch = ics.points[start:stop]
        m = stop - start
        # rows: k+1 orbits per cell, base first
        block = np.empty(((k + 1) * m, n))
        for row, i in enumerate(range(start, stop)):
            base = batch[row]
            block[row * (k + 1)] = base
            block[row * (k + 1) + 1 : (row + 1) * (k + 1)] = perturbations(
                base, epsilon, k, seed, i
            )
        finals, completed = integrate_final_states(sys, block, run_cfg, workers=workers)
        for row in range(m):
            sl = slice(row * (k + 1), (row + 1) * (k + 1))
            if not completed[sl].all():
                continue
            labels = []
            untestable = False
            for state in finals[sl]:
                try:
                    labels.append(eval_predicate(p, sys, state))
                except DomainError:
                    untestable = True
                    break
            if untestable:
                continue
            n_testable += 1
            if any(lab != labels[0] for lab in labels[1:]):
                n_boundary += 1
        if progress is not None:
            progress(stop, count)

    if n_testable == 0:
        raise BoundaryError("no testable cells: every orbit failed to integrate")
    return BoxcountResult(
        epsilon=epsilon,
        delta=epsilon / ics.region.longest_edge,
        n_testable=n_testable,
        n_boundary=n_boundary,
        n_excluded=count - n_testable,
    )


def epsilon_ladder(lo: float, hi: float, n: int) -> np.ndarray:
    if not (0 < lo < hi):
        raise ValueError("epsilon range must satisfy 0 < lo < hi")
    if n < 2:
        raise ValueError("need at least 2 epsilon values")
    return np.geomspace(lo, hi, n)


def fdimension(
    sys: SystemDef,
    ics: ICSet,
    p: Predicate,
    eps_range: tuple[float, float],
    n_epsilons: int,
    t_final: float,
    cfg: IntegratorConfig,
    k: int = 2,
    seed: int = 0,
    workers: int = 1,
    progress: Callable[[int, int], None] | None = None,
    cancel: Callable[[], bool] | None = None,
    boxcount_fn: Callable[..., BoxcountResult] | None = None,
) -> FdimResult:
    """Boundary fractal dimension: run boxcount over log-spaced epsilons and
    regress ln(boundary fraction) on ln(delta).

    Points with zero boundary cells carry no log information; they are kept
    in the returned point list but dropped from the fit and reported.
    boxcount_fn exists for injection in tests.
    """
    runner = boxcount_fn if boxcount_fn is not None else boxcount
    epsilons = epsilon_ladder(eps_range[0], eps_range[1], n_epsilons)
    total = n_epsilons * ics.count
    results: list[BoxcountResult] = []
    for j, eps in enumerate(epsilons):
        def _sub_progress(done, _count, _j=j):
            if progress is not None:
                progress(_j * ics.count + done, total)

        results.append(
            runner(
                sys, ics, p, float(eps), t_final, cfg,
                k=k, seed=seed, workers=workers,
                progress=_sub_progress, cancel=cancel,
            )
        )

    points = tuple((r.delta, r.fraction) for r in results)
    usable = [(r.delta, r.fraction) for r in results if r.n_boundary > 0]
    dropped = tuple(r.epsilon for r in results if r.n_boundary == 0)
    if len(usable) < 2:
        raise BoundaryError(
            f"only {len(usable)} epsilon value(s) produced boundary cells; "
            "cannot regress"
        )
    fit = fit_loglog([d for d, _ in usable], [f for _, f in usable])
    alpha = fit.slope
    d_b = sys.dimension - alpha
    se_percent = 100.0 * fit.se_slope / abs(d_b) if d_b != 0 else float("inf")
    return FdimResult(
        D=sys.dimension,
        alpha=alpha,
        d_B=d_b,
        se_percent=se_percent,
        pearson_r=fit.pearson_r,
        intercept=fit.intercept,
        points=points,
        dropped=dropped,
    )
