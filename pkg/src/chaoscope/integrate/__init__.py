"""Fixed-step RK5 trajectory integration, native and through external plugins."""
from .native import (
    integrate,
    integrate_ensemble,
    integrate_final_states,
    rk5_step,
    step_plan,
)
from .plugin import (
    DEFAULT_COMPILE_COMMAND,
    build_plugin,
    driver_source,
    expected_sample_count,
    run_plugin,
)
from .types import (
    IntegratorConfig,
    METHOD_NATIVE,
    METHOD_PLUGIN,
    PluginSpec,
    Trajectory,
    TrajectoryStatus,
)

__all__ = [
    "integrate", "integrate_ensemble", "integrate_final_states", "rk5_step",
    "step_plan", "DEFAULT_COMPILE_COMMAND", "build_plugin", "driver_source",
    "expected_sample_count", "run_plugin", "IntegratorConfig", "METHOD_NATIVE",
    "METHOD_PLUGIN", "PluginSpec", "Trajectory", "TrajectoryStatus",
]
