"""Experiment harness: configuration, drivers, reproducible artifacts."""

from .config import (
    EXPERIMENT_KINDS,
    ConfigError,
    ExperimentConfig,
    build_config,
    load_toml,
    validate_config,
)
from .experiments import (
    ExperimentResult,
    calibrated_thresholds,
    detect_trace_csv,
    parse_trace_csv,
    run_amplitude_sweep,
    run_comm,
    run_experiment,
    run_pulse_amplitude_char,
    run_pulse_width_sweep,
)
from .outputs import (
    ArtifactExistsError,
    format_cell,
    render_csv,
    render_figure,
    write_bundle,
)
from .prng import SplitMix64, random_symbols

__all__ = [
    "EXPERIMENT_KINDS",
    "ConfigError",
    "ExperimentConfig",
    "build_config",
    "load_toml",
    "validate_config",
    "ExperimentResult",
    "calibrated_thresholds",
    "detect_trace_csv",
    "parse_trace_csv",
    "run_amplitude_sweep",
    "run_comm",
    "run_experiment",
    "run_pulse_amplitude_char",
    "run_pulse_width_sweep",
    "ArtifactExistsError",
    "format_cell",
    "render_csv",
    "render_figure",
    "write_bundle",
    "SplitMix64",
    "random_symbols",
]
