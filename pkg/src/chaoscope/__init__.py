"""chaoscope: fractal boundary detection in the phase space of dynamical systems."""

__version__ = "0.1.0"

from .boundary import (
    BoxcountResult,
    Classification,
    FdimResult,
    ICSet,
    InitRegion,
    boxcount,
    classify,
    fdimension,
    sample_ics,
)
from .fractal import (
    BoxCountSeries,
    DimensionEstimate,
    FractalFamily,
    box_count_points,
    estimate_dimension,
    family_counts,
    fit_loglog,
)
from .integrate import (
    IntegratorConfig,
    PluginSpec,
    Trajectory,
    TrajectoryStatus,
    build_plugin,
    integrate,
    integrate_ensemble,
    rk5_step,
    run_plugin,
)
from .sysdsl import (
    Predicate,
    SystemDef,
    emit_kernel_source,
    eval_predicate,
    eval_rhs,
    format_system,
    parse_predicate,
    parse_system,
)

__all__ = [
    "__version__",
    "BoxcountResult", "Classification", "FdimResult", "ICSet", "InitRegion",
    "boxcount", "classify", "fdimension", "sample_ics",
    "BoxCountSeries", "DimensionEstimate", "FractalFamily", "box_count_points",
    "estimate_dimension", "family_counts", "fit_loglog",
    "IntegratorConfig", "PluginSpec", "Trajectory", "TrajectoryStatus",
    "build_plugin", "integrate", "integrate_ensemble", "rk5_step", "run_plugin",
    "Predicate", "SystemDef", "emit_kernel_source", "eval_predicate", "eval_rhs",
    "format_system", "parse_predicate", "parse_system",
]
