"""Configuration and result types for trajectory integration."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

METHOD_NATIVE = "native_rk5"
METHOD_PLUGIN = "plugin"


@dataclass(frozen=True)
class PluginSpec:
    """A built external integrator: kernel source, build command, executable."""

    kernel_source_path: str
    compile_command: str
    executable_path: str
    workdir: str


@dataclass(frozen=True)
class IntegratorConfig:
    h: float
    t0: float
    t1: float
    sample_stride: int = 1
    method: str = METHOD_NATIVE
    plugin: Optional[PluginSpec] = None

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("calc step h must be positive")
        if not self.t1 > self.t0:
            raise ValueError("t1 must be greater than t0")
        if self.sample_stride < 1:
            raise ValueError("sample_stride must be >= 1")
        if (self.t1 - self.t0) / self.h < 1.0 - 1e-12:
            raise ValueError("time range must cover at least one step")
        if self.method not in (METHOD_NATIVE, METHOD_PLUGIN):
            raise ValueError(f"unknown method {self.method!r}")
        # plugin presence is checked at dispatch time: a manifest loaded from
        # disk records method "plugin" without a live PluginSpec


@dataclass(frozen=True)
class TrajectoryStatus:
    completed: bool
    reason: str | None = None
    last_good_time: float | None = None


@dataclass(eq=False)
class Trajectory:
    """Sampled orbit of one initial condition."""

    ic_index: int
    times: np.ndarray  # (s,)
    states: np.ndarray  # (s, n)
    status: TrajectoryStatus

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.asarray(self.states, dtype=float)
        if self.times.ndim != 1 or self.states.ndim != 2:
            raise ValueError("times must be 1-D and states 2-D")
        if len(self.times) != len(self.states):
            raise ValueError("times and states must have equal length")
        if len(self.times) > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("times must be strictly increasing")

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]
