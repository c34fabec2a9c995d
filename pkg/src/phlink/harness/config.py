"""Experiment configuration: TOML loading, defaults, and validation.

A single TOML file with one table per subsystem configures every
experiment.  Missing keys fall back to embedded defaults chosen so an
empty file runs the interference-free communication experiment.  All
parameters are validated against the owning module's invariants before
any computation starts; every violation is collected and reported, not
just the first.
"""

from __future__ import annotations

import copy
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..channel import ChannelGeometry, TransportParams
from ..chemistry import (
    AcidSystem,
    SolutionSpec,
    StrongIon,
    gating_solution,
    supply_solution,
)
from ..modem import SymbolAlphabet
from ..receiver import SensorParams
from ..transmitter import GatingCycle, GatingLevel, GatingModel

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "EXPERIMENT_KINDS",
    "TIMING_PRESETS",
    "load_toml",
    "build_config",
    "validate_config",
]

EXPERIMENT_KINDS = (
    "amplitude_sweep",
    "pulse_width_sweep",
    "pulse_amplitude_char",
    "comm_run",
)

#: Named gating timings: (t_g, t_pi) in seconds.
TIMING_PRESETS = {
    "no_isi": (10.0, 20.0),
    "isi": (3.0, 10.0),
}

#: Embedded defaults.  The transport grid defaults to the fast
#: experiment profile (512 cells); the reference resolution of the
#: solver itself is 2048 cells (see ``TransportParams``) and can be
#: requested with ``transport.n = 2048``.
DEFAULTS: dict[str, Any] = {
    "experiment": {
        "kind": "comm_run",
        "seed": 1,
        "out_dir": "runs",
        "n_symbols": 20,
        "timing_preset": "no_isi",
        "threshold_source": "calibrate",
        "q1_sweep": [7.0, 6.0, 5.0, 4.0, 3.0, 2.0, 1.0, 0.5],
        "hold_s": 120.0,
        "t_g_sweep": [90.0, 60.0, 30.0, 20.0, 10.0, 4.0, 2.0],
        "sweep_t_pi": 60.0,
        "pulses_per_level": 9,
    },
    "chemistry": {
        "lookup_points": 256,
    },
    "geometry": {
        "w": 100e-6,
        "h": 100e-6,
        "l1": 9.2e-3,
        "l2": 80.5e-3,
        "s": 400e-6,
    },
    "transport": {
        "d": 1e-9,
        "aris_factor": 2.0 / 105.0,
        "n": 512,
        "cfl": 0.8,
    },
    "gating": {
        "qc": 7.0,
        "q2": 5.0,
        "q1_on": 7.0,
        "levels": [
            [0, 7.0, "7/5"],
            [1, 5.0, "5/5"],
            [2, 2.0, "2/5"],
            [3, 0.5, "0.5/5"],
        ],
    },
    "timing": {},
    "sensor": {
        "sensitivity": 65.0,
        "baseline_ph": 7.4,
        "tau_s": 1.0,
        "noise_sigma": 0.5,
        "sample_rate": 10.0,
        "iir_cutoff": 1.0,
        "adc_bits": 12,
        "adc_range": 3300.0,
    },
    "detection": {
        "thresholds": [6.30, 16.14, 24.15],
        "smoothing_window": 1.0,
    },
}


class ConfigError(ValueError):
    """Invalid configuration; ``errors`` lists every violation found."""

    def __init__(self, errors: list[str]) -> None:
        super().__init__("; ".join(errors))
        self.errors = errors


#: Recognized keys per table, including optional keys without defaults.
_ALLOWED_KEYS: dict[str, set[str]] = {
    "experiment": set(DEFAULTS["experiment"]),
    "chemistry": set(DEFAULTS["chemistry"]) | {"supply", "gating"},
    "geometry": set(DEFAULTS["geometry"]) | {"x_s"},
    "transport": set(DEFAULTS["transport"]),
    "gating": set(DEFAULTS["gating"]),
    "timing": {"t_g", "t_pi"},
    "sensor": set(DEFAULTS["sensor"]),
    "detection": set(DEFAULTS["detection"]) | {"frame_offset"},
}

_SOLUTION_KEYS = {"name", "strong_ions", "acid_systems"}


def _unknown_key_errors(raw: dict[str, Any]) -> list[str]:
    """Report tables and keys that no subsystem recognizes (typo guard)."""
    errors: list[str] = []
    for section, table in raw.items():
        allowed = _ALLOWED_KEYS.get(section)
        if allowed is None:
            errors.append(
                f"{section}: unknown table (expected one of {sorted(_ALLOWED_KEYS)})"
            )
            continue
        if not isinstance(table, dict):
            errors.append(f"{section}: must be a table, got {type(table).__name__}")
            continue
        for key in table:
            if key not in allowed:
                errors.append(
                    f"{section}.{key}: unknown key (expected one of {sorted(allowed)})"
                )
            elif section == "chemistry" and key in ("supply", "gating"):
                for sub in table[key]:
                    if sub not in _SOLUTION_KEYS:
                        errors.append(
                            f"chemistry.{key}.{sub}: unknown key "
                            f"(expected one of {sorted(_SOLUTION_KEYS)})"
                        )
    return errors


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully validated experiment setup with all domain objects built."""

    kind: str
    seed: int
    out_dir: str
    n_symbols: int
    threshold_source: str
    q1_sweep: tuple[float, ...]
    hold_s: float
    t_g_sweep: tuple[float, ...]
    sweep_t_pi: float
    pulses_per_level: int
    supply: SolutionSpec
    gating: SolutionSpec
    lookup_points: int
    geom: ChannelGeometry
    transport: TransportParams
    gating_model: GatingModel
    alphabet: SymbolAlphabet
    cycle: GatingCycle
    sensor: SensorParams
    thresholds: tuple[float, float, float]
    smoothing_window: float
    frame_offset: float | None


def _deep_merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def load_toml(source: str | Path) -> dict[str, Any]:
    """Parse TOML text or a file path into a raw configuration dict."""
    if isinstance(source, Path):
        text = source.read_text()
    else:
        path = Path(source)
        text = path.read_text() if path.is_file() else source
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError([f"TOML syntax: {exc}"]) from None


def _solution_from_table(table: dict, fallback: SolutionSpec) -> SolutionSpec:
    if not table:
        return fallback
    return SolutionSpec(
        name=table.get("name", fallback.name),
        strong_ions=tuple(
            StrongIon(int(z), float(c)) for z, c in table.get("strong_ions", [])
        ),
        acid_systems=tuple(
            AcidSystem(float(ct), tuple(float(p) for p in pkas))
            for ct, pkas in table.get("acid_systems", [])
        ),
    )


def build_config(raw: dict[str, Any] | None = None) -> ExperimentConfig:
    """Merge a raw dict over the defaults and build every domain object.

    Raises
    ------
    ConfigError
        Listing every invariant violation across all subsystems.
    """
    merged = _deep_merge(DEFAULTS, raw or {})
    errors: list[str] = _unknown_key_errors(raw or {})

    def attempt(label: str, fn):
        try:
            return fn()
        except (ValueError, TypeError, KeyError) as exc:
            errors.append(f"{label}: {exc}")
            return None

    exp = merged["experiment"]
    kind = exp.get("kind")
    if kind not in EXPERIMENT_KINDS:
        errors.append(
            f"experiment.kind: {kind!r} is not one of {EXPERIMENT_KINDS}"
        )
    seed = exp.get("seed")
    if not isinstance(seed, int) or seed < 0:
        errors.append(f"experiment.seed: must be a nonnegative integer, got {seed!r}")
    n_symbols = exp.get("n_symbols")
    if not isinstance(n_symbols, int) or n_symbols < 0:
        errors.append(
            f"experiment.n_symbols: must be a nonnegative integer, got {n_symbols!r}"
        )
    threshold_source = exp.get("threshold_source")
    if threshold_source not in ("calibrate", "fixed"):
        errors.append(
            "experiment.threshold_source: must be 'calibrate' or 'fixed', "
            f"got {threshold_source!r}"
        )
    q1_sweep = tuple(float(q) for q in exp.get("q1_sweep", []))
    if not q1_sweep or any(q < 0 for q in q1_sweep):
        errors.append(f"experiment.q1_sweep: needs nonnegative entries, got {q1_sweep}")
    hold_s = float(exp.get("hold_s", 0))
    if hold_s < 60.0:
        errors.append(f"experiment.hold_s: steady holds need >= 60 s, got {hold_s}")
    t_g_sweep = tuple(float(t) for t in exp.get("t_g_sweep", []))
    if not t_g_sweep or any(t <= 0 for t in t_g_sweep):
        errors.append(f"experiment.t_g_sweep: needs positive entries, got {t_g_sweep}")
    sweep_t_pi = float(exp.get("sweep_t_pi", 0))
    if sweep_t_pi <= 0:
        errors.append(f"experiment.sweep_t_pi: must be > 0, got {sweep_t_pi}")
    pulses_per_level = exp.get("pulses_per_level")
    if not isinstance(pulses_per_level, int) or pulses_per_level < 2:
        errors.append(
            "experiment.pulses_per_level: calibration needs >= 2, "
            f"got {pulses_per_level!r}"
        )

    chem = merged["chemistry"]
    lookup_points = chem.get("lookup_points")
    if not isinstance(lookup_points, int) or lookup_points < 2:
        errors.append(
            f"chemistry.lookup_points: must be an integer >= 2, got {lookup_points!r}"
        )
    supply = attempt(
        "chemistry.supply",
        lambda: _solution_from_table(chem.get("supply", {}), supply_solution()),
    )
    gating = attempt(
        "chemistry.gating",
        lambda: _solution_from_table(chem.get("gating", {}), gating_solution()),
    )

    geo = merged["geometry"]
    geom = attempt(
        "geometry",
        lambda: ChannelGeometry(
            w=float(geo["w"]), h=float(geo["h"]),
            l1=float(geo["l1"]), l2=float(geo["l2"]), s=float(geo["s"]),
            x_s=float(geo["x_s"]) if "x_s" in geo else None,
        ),
    )
    tr = merged["transport"]
    transport = attempt(
        "transport",
        lambda: TransportParams(
            d=float(tr["d"]), aris_factor=float(tr["aris_factor"]),
            n=int(tr["n"]), cfl=float(tr["cfl"]),
        ),
    )

    gat = merged["gating"]
    gating_model = attempt("gating", lambda: GatingModel(qc=float(gat["qc"])))
    alphabet = attempt(
        "gating.levels",
        lambda: SymbolAlphabet(
            levels=tuple(
                GatingLevel(int(idx), float(q1), str(label))
                for idx, q1, label in gat["levels"]
            ),
        ),
    )

    preset = exp.get("timing_preset")
    timing = merged["timing"]
    if preset not in TIMING_PRESETS:
        errors.append(
            f"experiment.timing_preset: {preset!r} is not one of "
            f"{tuple(TIMING_PRESETS)}"
        )
        preset = "no_isi"
    t_g_default, t_pi_default = TIMING_PRESETS[preset]
    cycle = attempt(
        "timing",
        lambda: GatingCycle(
            t_g=float(timing.get("t_g", t_g_default)),
            t_pi=float(timing.get("t_pi", t_pi_default)),
            q2=float(gat["q2"]),
            q1_on=float(gat["q1_on"]),
        ),
    )

    sen = merged["sensor"]
    sensor = attempt(
        "sensor",
        lambda: SensorParams(
            sensitivity=float(sen["sensitivity"]),
            baseline_ph=float(sen["baseline_ph"]),
            tau_s=float(sen["tau_s"]),
            noise_sigma=float(sen["noise_sigma"]),
            sample_rate=float(sen["sample_rate"]),
            iir_cutoff=float(sen["iir_cutoff"]),
            adc_bits=int(sen["adc_bits"]),
            adc_range=float(sen["adc_range"]),
        ),
    )

    det = merged["detection"]
    thresholds_raw = det.get("thresholds", [])
    thresholds: tuple[float, float, float] | None = None
    if len(thresholds_raw) != 3:
        errors.append(f"detection.thresholds: need exactly 3, got {thresholds_raw}")
    else:
        t1, t2, t3 = (float(t) for t in thresholds_raw)
        if not (t1 < t2 < t3):
            errors.append(
                f"detection.thresholds: must be strictly ascending, got {thresholds_raw}"
            )
        else:
            thresholds = (t1, t2, t3)
    smoothing_window = float(det.get("smoothing_window", 0))
    if smoothing_window < 0:
        errors.append(
            f"detection.smoothing_window: must be >= 0, got {smoothing_window}"
        )
    frame_offset = (
        float(det["frame_offset"]) if "frame_offset" in det else None
    )

    # cross-object conditions
    if cycle is not None and gating_model is not None:
        if cycle.q1_on < gating_model.qc:
            errors.append(
                f"gating.q1_on: ON-phase flow {cycle.q1_on} uL/min is below the "
                f"critical flow {gating_model.qc}; ON phases would leak supply fluid"
            )
    if cycle is not None and sensor is not None:
        if cycle.t_g < sensor.dt:
            errors.append(
                f"timing.t_g: {cycle.t_g} s is shorter than one sensor sample "
                f"({sensor.dt} s)"
            )

    if errors:
        raise ConfigError(errors)

    return ExperimentConfig(
        kind=kind,
        seed=seed,
        out_dir=str(exp.get("out_dir", "runs")),
        n_symbols=n_symbols,
        threshold_source=threshold_source,
        q1_sweep=q1_sweep,
        hold_s=hold_s,
        t_g_sweep=t_g_sweep,
        sweep_t_pi=sweep_t_pi,
        pulses_per_level=pulses_per_level,
        supply=supply,
        gating=gating,
        lookup_points=lookup_points,
        geom=geom,
        transport=transport,
        gating_model=gating_model,
        alphabet=alphabet,
        cycle=cycle,
        sensor=sensor,
        thresholds=thresholds,
        smoothing_window=smoothing_window,
        frame_offset=frame_offset,
    )


def validate_config(raw: dict[str, Any] | None = None) -> list[str]:
    """All invariant violations in a raw config dict (empty list = valid)."""
    try:
        build_config(raw)
    except ConfigError as exc:
        return exc.errors
    return []
