"""4-ary amplitude-shift modem: bits to symbols, traces to decisions.

Symbols are carried by the peak height of the acid pulse each frame.
Modulation maps bit pairs onto four gating levels through a Gray code;
detection smooths the received trace, extracts the per-frame maximum,
and classifies it against three ascending thresholds.  Thresholds can
be calibrated from training pulses as midpoints between adjacent level
means.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .receiver import SensorTrace
from .transmitter import GatingLevel

__all__ = [
    "ModemError",
    "FramingError",
    "TruncationError",
    "AlignmentError",
    "InseparableLevelsError",
    "SymbolAlphabet",
    "DetectionConfig",
    "SymbolFrame",
    "default_alphabet",
    "modulate",
    "demap",
    "smooth",
    "detect",
    "calibrate_thresholds",
    "symbol_error_rate",
    "bit_error_rate",
]

GRAY_LABELS = ("00", "01", "11", "10")
"""2-bit Gray sequence: adjacent levels differ in exactly one bit."""


class ModemError(ValueError):
    """Base class for modem failures."""


class FramingError(ModemError):
    """The bit stream cannot be split into whole symbols."""


class TruncationError(ModemError):
    """The trace does not cover all symbol windows."""


class AlignmentError(ModemError):
    """Transmitted and received sequences differ in length."""


class InseparableLevelsError(ModemError):
    """Training peak means are not strictly ordered by level."""


@dataclass(frozen=True)
class SymbolAlphabet:
    """The four modulation levels in ascending expected-amplitude order.

    Level 0 is the baseline ratio (highest gating flow, smallest pulse)
    and level 3 admits the most supply fluid (largest pulse).  Each
    level carries a distinct 2-bit Gray label.
    """

    levels: tuple[GatingLevel, GatingLevel, GatingLevel, GatingLevel]
    bit_map: tuple[str, str, str, str] = GRAY_LABELS

    def __post_init__(self) -> None:
        if len(self.levels) != 4:
            raise ModemError(f"alphabet needs exactly 4 levels, got {len(self.levels)}")
        if tuple(lv.symbol_index for lv in self.levels) != (0, 1, 2, 3):
            raise ModemError("levels must carry symbol indices 0..3 in order")
        flows = [lv.q1_off for lv in self.levels]
        if len(set(flows)) != 4:
            raise ModemError(f"levels must have distinct gating flows, got {flows}")
        if sorted(self.bit_map) != sorted(GRAY_LABELS):
            raise ModemError(
                f"bit map must be a bijection onto {GRAY_LABELS}, got {self.bit_map}"
            )

    def bits_of(self, symbol: int) -> str:
        return self.bit_map[symbol]

    def symbol_of(self, bits: str) -> int:
        try:
            return self.bit_map.index(bits)
        except ValueError:
            raise FramingError(f"bit pair {bits!r} not in map {self.bit_map}") from None


def default_alphabet() -> SymbolAlphabet:
    """The standard four flow-rate ratios with Q2 = 5 uL/min."""
    return SymbolAlphabet(
        levels=(
            GatingLevel(0, 7.0, "7/5"),
            GatingLevel(1, 5.0, "5/5"),
            GatingLevel(2, 2.0, "2/5"),
            GatingLevel(3, 0.5, "0.5/5"),
        )
    )


@dataclass(frozen=True)
class DetectionConfig:
    """Detector settings.

    Parameters
    ----------
    thresholds : tuple of float
        Ascending decision boundaries (T1, T2, T3), mV.
    smoothing_window : float
        Width of the centered moving average applied before peak
        extraction, s.
    frame_offset : float
        Start of the first symbol window, s (transmit anchor plus
        propagation delay).
    frame_length : float
        Window length per symbol, s (gating-OFF plus inter-pulse time).
    """

    frame_length: float
    thresholds: tuple[float, float, float] = (6.30, 16.14, 24.15)
    smoothing_window: float = 1.0
    frame_offset: float = 0.0

    def __post_init__(self) -> None:
        t1, t2, t3 = self.thresholds
        if not (t1 < t2 < t3):
            raise ModemError(f"thresholds must ascend, got {self.thresholds}")
        if self.smoothing_window < 0:
            raise ModemError(
                f"smoothing window must be >= 0, got {self.smoothing_window}"
            )
        if not self.frame_length > 0:
            raise ModemError(f"frame length must be > 0, got {self.frame_length}")


@dataclass(frozen=True)
class SymbolFrame:
    """Per-symbol detection record."""

    index: int
    t_start: float
    t_end: float
    peak_dv: float
    decided_symbol: int
    tx_symbol: int | None = None
    fwhm: float = float("nan")

    def __post_init__(self) -> None:
        if not self.t_end > self.t_start:
            raise ModemError(f"empty frame window [{self.t_start}, {self.t_end})")


def modulate(bits: Sequence[int] | str, alphabet: SymbolAlphabet) -> list[int]:
    """Map a bit sequence to symbols, two bits per symbol.

    Raises
    ------
    FramingError
        If the bit count is odd or a bit is not 0/1.
    """
    if isinstance(bits, str):
        bit_str = bits
    else:
        try:
            bit_str = "".join(str(int(b)) for b in bits)
        except (TypeError, ValueError):
            raise FramingError(f"bits must be 0/1, got {bits!r}") from None
    if any(b not in "01" for b in bit_str):
        raise FramingError(f"bits must be 0/1, got {bits!r}")
    if len(bit_str) % 2:
        raise FramingError(f"bit count must be even, got {len(bit_str)}")
    return [
        alphabet.symbol_of(bit_str[i : i + 2]) for i in range(0, len(bit_str), 2)
    ]


def demap(symbols: Sequence[int], alphabet: SymbolAlphabet) -> str:
    """Symbols back to the concatenated bit string."""
    return "".join(alphabet.bits_of(int(s)) for s in symbols)


def smooth(values: np.ndarray, window: float, dt: float) -> np.ndarray:
    """Centered moving average with edge-truncated windows.

    The window spans ``round(window / dt)`` samples; at the edges the
    average runs over the available samples only, so constant signals
    are preserved exactly.  A window of one sample or less is the
    identity.
    """
    x = np.asarray(values, dtype=float)
    k = int(round(window / dt))
    if k <= 1 or len(x) == 0:
        return x.copy()
    half_lo = (k - 1) // 2
    half_hi = k - 1 - half_lo
    csum = np.concatenate(([0.0], np.cumsum(x)))
    idx = np.arange(len(x))
    lo = np.maximum(idx - half_lo, 0)
    hi = np.minimum(idx + half_hi + 1, len(x))
    return (csum[hi] - csum[lo]) / (hi - lo)


def _fwhm(t: np.ndarray, y: np.ndarray) -> float:
    """Full width at half maximum by linear interpolation around the peak.

    Returns NaN when the signal does not cross half-maximum on both
    sides of the peak inside the window.
    """
    if len(y) < 3:
        return float("nan")
    peak_idx = int(np.argmax(y))
    half = 0.5 * y[peak_idx]
    if not half > 0:
        return float("nan")
    left = right = float("nan")
    for i in range(peak_idx, 0, -1):
        if y[i - 1] <= half < y[i]:
            frac = (half - y[i - 1]) / (y[i] - y[i - 1])
            left = t[i - 1] + frac * (t[i] - t[i - 1])
            break
    for i in range(peak_idx, len(y) - 1):
        if y[i] > half >= y[i + 1]:
            frac = (y[i] - half) / (y[i] - y[i + 1])
            right = t[i] + frac * (t[i + 1] - t[i])
            break
    return right - left


def detect(
    trace: SensorTrace,
    n_symbols: int,
    config: DetectionConfig,
    tx_symbols: Sequence[int] | None = None,
) -> list[SymbolFrame]:
    """Classify each symbol window by its smoothed peak height.

    Window ``i`` spans
    ``[frame_offset + i*frame_length, frame_offset + (i+1)*frame_length)``.
    The decision is the number of thresholds strictly below the window
    peak (0 = baseline level).

    Raises
    ------
    TruncationError
        If the trace ends before the last window.
    """
    if tx_symbols is not None and len(tx_symbols) != n_symbols:
        raise AlignmentError(
            f"{len(tx_symbols)} transmit symbols for {n_symbols} windows"
        )
    t_needed = config.frame_offset + n_symbols * config.frame_length
    t_end = trace.t0 + len(trace.values) * trace.dt
    if t_end + 1e-9 < t_needed:
        raise TruncationError(
            f"trace ends at {t_end:.2f} s but windows extend to {t_needed:.2f} s"
        )
    smoothed = smooth(trace.values, config.smoothing_window, trace.dt)
    t = trace.t
    thresholds = np.asarray(config.thresholds)
    frames: list[SymbolFrame] = []
    for i in range(n_symbols):
        t_lo = config.frame_offset + i * config.frame_length
        t_hi = t_lo + config.frame_length
        lo = int(math.ceil((t_lo - trace.t0 - 1e-9) / trace.dt))
        hi = int(math.ceil((t_hi - trace.t0 - 1e-9) / trace.dt))
        window = smoothed[max(lo, 0) : hi]
        if len(window) == 0:
            raise TruncationError(f"window {i} [{t_lo}, {t_hi}) holds no samples")
        peak = float(np.max(window))
        decided = int(np.searchsorted(thresholds, peak, side="left"))
        frames.append(
            SymbolFrame(
                index=i,
                t_start=t_lo,
                t_end=t_hi,
                peak_dv=peak,
                decided_symbol=decided,
                tx_symbol=None if tx_symbols is None else int(tx_symbols[i]),
                fwhm=_fwhm(t[max(lo, 0) : hi], window),
            )
        )
    return frames


def calibrate_thresholds(
    training: Mapping[int, Sequence[float]]
) -> tuple[float, float, float]:
    """Decision boundaries from per-level training peaks.

    Each threshold is the midpoint between the mean peaks of adjacent
    levels.  Requires at least two peaks per level and strictly
    ascending level means.

    Parameters
    ----------
    training : mapping
        ``{level_index: [peak_dv, ...]}`` for levels 0..3.

    Raises
    ------
    InseparableLevelsError
        If any adjacent pair of level means is not strictly ordered.
    """
    if sorted(training) != [0, 1, 2, 3]:
        raise ModemError(f"training data must cover levels 0..3, got {sorted(training)}")
    means = []
    for level in range(4):
        peaks = list(training[level])
        if len(peaks) < 2:
            raise ModemError(
                f"level {level} needs >= 2 training peaks, got {len(peaks)}"
            )
        means.append(float(np.mean(peaks)))
    for a, b in zip(range(3), range(1, 4)):
        if not means[a] < means[b]:
            raise InseparableLevelsError(
                f"levels {a} and {b} are not separable: "
                f"means {means[a]:.3f} and {means[b]:.3f} mV"
            )
    t1, t2, t3 = (
        0.5 * (means[0] + means[1]),
        0.5 * (means[1] + means[2]),
        0.5 * (means[2] + means[3]),
    )
    return (t1, t2, t3)


def symbol_error_rate(tx: Sequence[int], rx: Sequence[int]) -> float:
    """Fraction of mismatched symbol positions (0 for empty input)."""
    if len(tx) != len(rx):
        raise AlignmentError(f"length mismatch: {len(tx)} vs {len(rx)}")
    if not tx:
        return 0.0
    return sum(a != b for a, b in zip(tx, rx)) / len(tx)


def bit_error_rate(
    tx: Sequence[int], rx: Sequence[int], alphabet: SymbolAlphabet
) -> float:
    """Fraction of mismatched bits after demapping both sequences."""
    if len(tx) != len(rx):
        raise AlignmentError(f"length mismatch: {len(tx)} vs {len(rx)}")
    if not tx:
        return 0.0
    bits_tx = demap(tx, alphabet)
    bits_rx = demap(rx, alphabet)
    return sum(a != b for a, b in zip(bits_tx, bits_rx)) / len(bits_tx)
