"""Config-driven experiments: presets, the runner and plot-data emission."""
from .config import (
    ConfigError,
    EqualizerConfig,
    EvaluationConfig,
    ExperimentConfig,
    RunsConfig,
    SweepConfig,
    apply_desk_scale,
    load_config,
    parse_config,
)
from .plotdata import emit_plot_data, ser_floor
from .presets import PRESETS, preset
from .runner import (
    RESULT_COLUMNS,
    ExperimentResult,
    ResultRow,
    RunResult,
    aggregate,
    eval_schedule,
    make_trainer,
    run_experiment,
    run_single,
)

__all__ = [
    "ConfigError", "EqualizerConfig", "EvaluationConfig", "ExperimentConfig", "RunsConfig", "SweepConfig",
    "apply_desk_scale", "load_config", "parse_config", "emit_plot_data", "ser_floor", "PRESETS", "preset",
    "RESULT_COLUMNS", "ExperimentResult", "ResultRow", "RunResult", "aggregate", "eval_schedule",
    "make_trainer", "run_experiment", "run_single",
]
