"""Path-tracking simulation for Ackermann vehicles."""

from ._core import (
    ConfigError,
    ConvergenceError,
    EndOfCourse,
    FitError,
    course,
    dead_reckoning,
    discretize_zoh,
    excite,
    fit_arx2,
    lateral_matrices,
    lqr_gain,
    normalize_config,
    parse_speed,
    run,
    run_csv,
    solve_dare,
    step_metrics,
    summarize_error,
    total_variation,
)

RUN_COLUMNS = (
    "t", "s", "x", "y", "theta", "v_x", "v_y", "omega_z", "delta_cmd",
    "delta_act", "throttle", "e_cg", "e_fa", "theta_e",
)

__all__ = [
    "ConfigError", "ConvergenceError", "EndOfCourse", "FitError", "RUN_COLUMNS",
    "course", "dead_reckoning", "discretize_zoh", "excite", "fit_arx2",
    "lateral_matrices", "lqr_gain", "normalize_config", "parse_speed", "run",
    "run_csv", "solve_dare", "step_metrics", "summarize_error", "total_variation",
]
