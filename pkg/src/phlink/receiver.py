"""Potentiometric receiver chain: pH series in, digitized voltage out.

Models the sensing electronics as five stages applied in order:
linear transduction (mV per pH unit against a buffer baseline),
first-order sensor lag, additive white Gaussian noise, a single-pole
low-pass IIR filter, and mid-range 12-bit quantization.  All stages are
deterministic given the configured seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

__all__ = [
    "ReceiverError",
    "ConfigurationError",
    "SensorParams",
    "SensorTrace",
    "transduce",
    "sensor_lag",
    "add_noise",
    "iir_lowpass",
    "quantize",
    "measure",
]

#: pH range over which the linear calibration is trusted.
PLAUSIBLE_PH = (2.0, 10.0)


class ReceiverError(ValueError):
    """Base class for receiver failures."""


class ConfigurationError(ReceiverError):
    """Sensor parameters are inconsistent (e.g. Nyquist violation)."""


@dataclass(frozen=True)
class SensorParams:
    """Configuration of the full sensing chain.

    Parameters
    ----------
    sensitivity : float
        Transduction slope, mV per pH unit, > 0.
    baseline_ph : float
        pH producing zero potential difference.
    tau_s : float
        Sensor first-order time constant, s, >= 0 (0 disables the lag).
    noise_sigma : float
        Standard deviation of the additive voltage noise, mV, >= 0.
    sample_rate : float
        Output sampling rate, Hz; must exceed twice the filter cutoff.
    iir_cutoff : float
        Low-pass cutoff frequency, Hz.
    adc_bits : int
        Converter resolution, >= 1.
    adc_range : float
        Converter full-scale span, mV; signals are offset to mid-range.
    rng_seed : int
        Seed of the noise generator.
    """

    sensitivity: float = 65.0
    baseline_ph: float = 7.4
    tau_s: float = 1.0
    noise_sigma: float = 0.5
    sample_rate: float = 10.0
    iir_cutoff: float = 1.0
    adc_bits: int = 12
    adc_range: float = 3300.0
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if not self.sensitivity > 0:
            raise ConfigurationError(f"sensitivity must be > 0, got {self.sensitivity}")
        if self.tau_s < 0:
            raise ConfigurationError(f"tau_s must be >= 0, got {self.tau_s}")
        if self.noise_sigma < 0:
            raise ConfigurationError(
                f"noise_sigma must be >= 0, got {self.noise_sigma}"
            )
        if not self.sample_rate > 2.0 * self.iir_cutoff:
            raise ConfigurationError(
                f"sample rate {self.sample_rate} Hz must exceed twice the "
                f"filter cutoff {self.iir_cutoff} Hz"
            )
        if self.adc_bits < 1:
            raise ConfigurationError(f"adc_bits must be >= 1, got {self.adc_bits}")
        if not self.adc_range > 0:
            raise ConfigurationError(f"adc_range must be > 0, got {self.adc_range}")

    @property
    def dt(self) -> float:
        """Output sample spacing, s."""
        return 1.0 / self.sample_rate

    @property
    def lsb(self) -> float:
        """Converter step size, mV."""
        return self.adc_range / 2**self.adc_bits


@dataclass(frozen=True)
class SensorTrace:
    """Uniformly sampled potential-difference time series.

    Attributes
    ----------
    t0 : float
        Time of the first sample, s.
    dt : float
        Sample spacing, s.
    values : numpy.ndarray
        Potential difference relative to baseline, mV.
    clip_count : int
        Number of samples saturated by the converter.
    warnings : tuple of str
        Non-fatal observations from the chain.
    """

    t0: float
    dt: float
    values: np.ndarray
    clip_count: int = 0
    warnings: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.dt <= 0:
            raise ReceiverError(f"dt must be > 0, got {self.dt}")
        if not np.all(np.isfinite(self.values)):
            raise ReceiverError("trace contains non-finite values")

    @property
    def t(self) -> np.ndarray:
        """Sample times, s."""
        return self.t0 + np.arange(len(self.values)) * self.dt


def transduce(ph: np.ndarray, params: SensorParams) -> np.ndarray:
    """Ideal potential difference for a pH series, mV.

    ``dv = sensitivity * (baseline_ph - ph)``: acidic excursions below
    the baseline give positive voltage.
    """
    return params.sensitivity * (params.baseline_ph - np.asarray(ph, dtype=float))


def sensor_lag(values: np.ndarray, tau_s: float, dt: float) -> np.ndarray:
    """First-order low-pass response of the electrode itself.

    Discrete update ``y[k] = y[k-1] + (1 - exp(-dt/tau)) * (x[k] - y[k-1])``
    with the state initialized to the first sample.  ``tau_s = 0`` is the
    identity.
    """
    if tau_s < 0:
        raise ReceiverError(f"tau_s must be >= 0, got {tau_s}")
    x = np.asarray(values, dtype=float)
    if tau_s == 0 or len(x) == 0:
        return x.copy()
    alpha = 1.0 - math.exp(-dt / tau_s)
    y, _ = lfilter([alpha], [1.0, -(1.0 - alpha)], x, zi=[(1.0 - alpha) * x[0]])
    return y


def add_noise(values: np.ndarray, noise_sigma: float, rng_seed: int) -> np.ndarray:
    """Add seeded zero-mean white Gaussian noise, mV."""
    if noise_sigma < 0:
        raise ReceiverError(f"noise_sigma must be >= 0, got {noise_sigma}")
    x = np.asarray(values, dtype=float)
    if noise_sigma == 0:
        return x.copy()
    rng = np.random.default_rng(rng_seed)
    return x + rng.normal(0.0, noise_sigma, size=x.shape)


def iir_lowpass(values: np.ndarray, cutoff: float, sample_rate: float) -> np.ndarray:
    """Single-pole low-pass filter with exactly unit DC gain.

    ``y[k] = a*y[k-1] + (1-a)*x[k]`` with ``a = exp(-2*pi*cutoff/fs)``;
    the state starts at the first input sample.
    """
    if not sample_rate > 2.0 * cutoff:
        raise ConfigurationError(
            f"sample rate {sample_rate} Hz must exceed twice the cutoff {cutoff} Hz"
        )
    x = np.asarray(values, dtype=float)
    if len(x) == 0:
        return x.copy()
    a = math.exp(-2.0 * math.pi * cutoff / sample_rate)
    y, _ = lfilter([1.0 - a], [1.0, -a], x, zi=[a * x[0]])
    return y


def quantize(
    values: np.ndarray, adc_bits: int, adc_range: float
) -> tuple[np.ndarray, int]:
    """Round to the converter grid; returns ``(quantized, clip_count)``.

    Values are offset to mid-range, clamped to the representable span,
    and rounded to the nearest of ``2**adc_bits`` code centers, so any
    in-range value is reproduced within half an LSB.
    """
    if adc_bits < 1:
        raise ReceiverError(f"adc_bits must be >= 1, got {adc_bits}")
    x = np.asarray(values, dtype=float)
    lsb = adc_range / 2**adc_bits
    mid = adc_range / 2.0
    codes = np.rint((x + mid) / lsb)
    clipped = np.clip(codes, 0, 2**adc_bits - 1)
    clip_count = int(np.count_nonzero(codes != clipped))
    return clipped * lsb - mid, clip_count


def measure(
    ph: np.ndarray, dt_in: float, params: SensorParams, t0: float = 0.0
) -> SensorTrace:
    """Run the full sensing chain on a uniformly sampled pH series.

    The series is resampled to the configured sample rate (linear
    interpolation; identity when the rates already match), then passed
    through transduction, sensor lag, noise, the IIR filter, and
    quantization.  Deterministic for a fixed ``params.rng_seed``.
    """
    if dt_in <= 0:
        raise ReceiverError(f"dt_in must be > 0, got {dt_in}")
    ph = np.asarray(ph, dtype=float)
    warnings: list[str] = []
    if len(ph) and (ph.min() < PLAUSIBLE_PH[0] or ph.max() > PLAUSIBLE_PH[1]):
        warnings.append(
            f"pH outside calibrated range {PLAUSIBLE_PH}: "
            f"[{ph.min():.2f}, {ph.max():.2f}]"
        )
    dt_out = params.dt
    if len(ph) and not math.isclose(dt_in, dt_out, rel_tol=1e-9):
        t_in = np.arange(len(ph)) * dt_in
        n_out = int(math.floor(t_in[-1] / dt_out)) + 1
        ph = np.interp(np.arange(n_out) * dt_out, t_in, ph)
    dv = transduce(ph, params)
    dv = sensor_lag(dv, params.tau_s, dt_out)
    dv = add_noise(dv, params.noise_sigma, params.rng_seed)
    dv = iir_lowpass(dv, params.iir_cutoff, params.sample_rate)
    dv, clip_count = quantize(dv, params.adc_bits, params.adc_range)
    return SensorTrace(
        t0=t0, dt=dt_out, values=dv,
        clip_count=clip_count, warnings=tuple(warnings),
    )
