"""Hydrodynamic-gating transmitter: symbols to flow-rate schedules.

The transmitter encodes a symbol stream as a piecewise-constant timeline
of two pump rates: the gating flow Q1 (baseline buffer) and the supply
flow Q2 (acidic signal fluid).  During an ON phase the gating flow is
high enough to block the supply entirely; during an OFF phase a reduced
gating flow admits a supply fraction set by the chosen modulation level.
The schedule is then sampled into the inlet boundary signal consumed by
the transport solver: the supply fraction ``f_in`` and the bulk velocity
``u`` of the merged stream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "TransmitterError",
    "NoFlowError",
    "EncodingError",
    "ResolutionError",
    "GatingModel",
    "GatingLevel",
    "GatingCycle",
    "Segment",
    "FlowSchedule",
    "InletSignal",
    "supply_fraction",
    "outlet_flow",
    "schedule_from_symbols",
    "inlet_signal",
]

#: Conversion from microlitres/minute to m^3/s.
UL_PER_MIN = 1e-9 / 60.0


class TransmitterError(ValueError):
    """Base class for transmitter failures."""


class NoFlowError(TransmitterError):
    """Both pump rates are zero; the junction state is undefined."""


class EncodingError(TransmitterError):
    """A symbol has no matching modulation level."""


class ResolutionError(TransmitterError):
    """The sampling step cannot resolve the shortest schedule segment."""


@dataclass(frozen=True)
class GatingModel:
    """Phenomenological junction model.

    Parameters
    ----------
    qc : float
        Critical gating flow (uL/min) at which the supply stream is
        fully diverted; above it no supply enters the channel.
    """

    qc: float = 7.0

    def __post_init__(self) -> None:
        if not self.qc > 0:
            raise TransmitterError(f"critical gating flow must be > 0, got {self.qc}")


@dataclass(frozen=True)
class GatingLevel:
    """One modulation level: the OFF-phase gating flow for a symbol.

    Parameters
    ----------
    symbol_index : int
        Symbol value this level encodes (0-based).
    q1_off : float
        Gating flow during the OFF phase, uL/min.
    label : str
        Display label, conventionally the flow ratio (e.g. ``"0.5/5"``).
    """

    symbol_index: int
    q1_off: float
    label: str = ""

    def __post_init__(self) -> None:
        if self.q1_off < 0:
            raise TransmitterError(f"q1_off must be >= 0, got {self.q1_off}")


@dataclass(frozen=True)
class GatingCycle:
    """Timing and baseline flows shared by all symbols of a transmission.

    Parameters
    ----------
    t_g : float
        Gating-OFF duration (pulse width), s, > 0.
    t_pi : float
        Inter-pulse gating-ON duration, s, >= 0.
    q2 : float
        Supply pump rate, uL/min, > 0 (held constant).
    q1_on : float
        Gating pump rate during ON phases, uL/min.  Must be at least the
        junction's critical flow for ON phases to block the supply; that
        cross-object condition is checked when configs are validated.
    """

    t_g: float
    t_pi: float
    q2: float = 5.0
    q1_on: float = 7.0

    def __post_init__(self) -> None:
        if not self.t_g > 0:
            raise TransmitterError(f"t_g must be > 0, got {self.t_g}")
        if self.t_pi < 0:
            raise TransmitterError(f"t_pi must be >= 0, got {self.t_pi}")
        if not self.q2 > 0:
            raise TransmitterError(f"q2 must be > 0, got {self.q2}")
        if self.q1_on < 0:
            raise TransmitterError(f"q1_on must be >= 0, got {self.q1_on}")


@dataclass(frozen=True)
class Segment:
    """One constant-flow span of a schedule."""

    start: float
    duration: float
    q1: float
    q2: float

    def __post_init__(self) -> None:
        if self.duration < 0 or self.q1 < 0 or self.q2 < 0:
            raise TransmitterError(
                f"segment fields must be >= 0, got {self!r}"
            )


@dataclass(frozen=True)
class FlowSchedule:
    """Contiguous, non-overlapping timeline of pump rates starting at 0 s."""

    segments: tuple[Segment, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "segments", tuple(self.segments))
        t = 0.0
        for seg in self.segments:
            if not math.isclose(seg.start, t, rel_tol=0.0, abs_tol=1e-9):
                raise TransmitterError(
                    f"segments must be gapless: expected start {t}, got {seg.start}"
                )
            t = seg.start + seg.duration

    @property
    def total_duration(self) -> float:
        """End time of the last segment, s."""
        if not self.segments:
            return 0.0
        last = self.segments[-1]
        return last.start + last.duration

    @staticmethod
    def from_durations(parts: Sequence[tuple[float, float, float]]) -> "FlowSchedule":
        """Build from ``(duration, q1, q2)`` triples, dropping empty spans."""
        segments = []
        t = 0.0
        for duration, q1, q2 in parts:
            if duration > 0:
                segments.append(Segment(t, duration, q1, q2))
                t += duration
        return FlowSchedule(tuple(segments))


def supply_fraction(q1: float, q2: float, model: GatingModel) -> float:
    """Supply volume fraction entering the channel for pump rates (q1, q2).

    Uses the linear-cutoff junction model: the fraction falls linearly
    from 1 at zero gating flow to 0 at the critical flow ``model.qc`` and
    is clamped to [0, 1].  Monotone nonincreasing in ``q1``.

    Raises
    ------
    NoFlowError
        If both rates are zero.
    """
    if q1 < 0 or q2 < 0:
        raise TransmitterError(f"pump rates must be >= 0, got q1={q1}, q2={q2}")
    if q1 == 0 and q2 == 0:
        raise NoFlowError("no flow at the junction: q1 = q2 = 0")
    return min(1.0, max(0.0, 1.0 - q1 / model.qc))


def outlet_flow(q1: float, q2: float) -> float:
    """Total volumetric rate leaving the junction, uL/min (no waste port)."""
    if q1 < 0 or q2 < 0:
        raise TransmitterError(f"pump rates must be >= 0, got q1={q1}, q2={q2}")
    return q1 + q2


def schedule_from_symbols(
    symbols: Sequence[int],
    alphabet: Sequence[GatingLevel],
    cycle: GatingCycle,
) -> FlowSchedule:
    """Encode a symbol sequence as a gating schedule.

    The schedule opens with one ON segment of length ``t_pi`` (baseline
    settling), then for each symbol emits an OFF segment (``t_g`` at the
    level's ``q1_off``) followed by an ON segment (``t_pi`` at
    ``q1_on``).  Zero-length spans are dropped.

    Raises
    ------
    EncodingError
        If a symbol has no level in the alphabet.
    """
    by_index = {level.symbol_index: level for level in alphabet}
    if len(by_index) != len(alphabet):
        raise EncodingError("alphabet has duplicate symbol indices")
    parts: list[tuple[float, float, float]] = [(cycle.t_pi, cycle.q1_on, cycle.q2)]
    for sym in symbols:
        level = by_index.get(sym)
        if level is None:
            raise EncodingError(
                f"symbol {sym} not in alphabet {sorted(by_index)}"
            )
        parts.append((cycle.t_g, level.q1_off, cycle.q2))
        parts.append((cycle.t_pi, cycle.q1_on, cycle.q2))
    return FlowSchedule.from_durations(parts)


@dataclass(frozen=True)
class InletSignal:
    """Uniformly sampled boundary signal for the transport solver.

    Attributes
    ----------
    dt : float
        Sample spacing, s.
    f_in : numpy.ndarray
        Supply fraction entering the channel per sample.
    u : numpy.ndarray
        Bulk plug-flow velocity per sample, m/s.
    """

    dt: float
    f_in: np.ndarray
    u: np.ndarray

    @property
    def n_samples(self) -> int:
        return len(self.f_in)

    @property
    def t(self) -> np.ndarray:
        """Sample times, s."""
        return np.arange(self.n_samples) * self.dt


def inlet_signal(
    schedule: FlowSchedule,
    model: GatingModel,
    dt: float,
    cross_section: float,
) -> InletSignal:
    """Sample a schedule into the channel's inlet boundary signal.

    Each sample takes the values of the segment active at ``t = k*dt``
    (segment boundaries belong to the newer segment), giving square-wave
    transitions exactly at segment edges.  The velocity is the total
    junction outflow divided by the channel cross-section.

    Parameters
    ----------
    dt : float
        Sampling step, s; must not exceed the shortest segment.
    cross_section : float
        Channel cross-sectional area, m^2.

    Raises
    ------
    ResolutionError
        If ``dt`` exceeds the shortest segment duration.
    """
    if dt <= 0:
        raise TransmitterError(f"dt must be > 0, got {dt}")
    if not cross_section > 0:
        raise TransmitterError(f"cross-section must be > 0, got {cross_section}")
    if not schedule.segments:
        return InletSignal(dt=dt, f_in=np.zeros(0), u=np.zeros(0))
    shortest = min(seg.duration for seg in schedule.segments)
    if dt > shortest + 1e-12:
        raise ResolutionError(
            f"dt={dt} s cannot resolve the shortest segment ({shortest} s)"
        )
    n = int(round(schedule.total_duration / dt))
    starts = np.array([seg.start for seg in schedule.segments])
    f_seg = np.array(
        [supply_fraction(seg.q1, seg.q2, model) for seg in schedule.segments]
    )
    u_seg = np.array(
        [outlet_flow(seg.q1, seg.q2) * UL_PER_MIN / cross_section
         for seg in schedule.segments]
    )
    t = np.arange(n) * dt
    idx = np.minimum(
        np.searchsorted(starts, t + 1e-12, side="right") - 1,
        len(starts) - 1,
    )
    return InletSignal(dt=dt, f_in=f_seg[idx], u=u_seg[idx])
