"""Sensing chain: transduction, lag, noise, filtering, quantization."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from phlink.receiver import (
    ConfigurationError,
    ReceiverError,
    SensorParams,
    SensorTrace,
    add_noise,
    iir_lowpass,
    measure,
    quantize,
    sensor_lag,
    transduce,
)


class TestTransduce:
    def test_slope_and_baseline(self):
        p = SensorParams()
        assert transduce(np.array([7.4]), p)[0] == pytest.approx(0.0)
        assert transduce(np.array([6.4]), p)[0] == pytest.approx(65.0)
        assert transduce(np.array([8.4]), p)[0] == pytest.approx(-65.0)

    def test_linear_in_ph(self):
        p = SensorParams()
        ph = np.linspace(3.0, 10.0, 29)
        dv = transduce(ph, p)
        assert dv == pytest.approx(65.0 * (7.4 - ph))


class TestSensorLag:
    def test_zero_tau_is_identity(self):
        x = np.array([1.0, -2.0, 3.0])
        assert np.array_equal(sensor_lag(x, 0.0, 0.1), x)

    def test_step_response_matches_exponential(self):
        dt, tau = 0.1, 1.0
        n = 100
        # state starts at the first input sample, so drive a step that
        # begins after a settled zero stretch
        x = np.concatenate([np.zeros(5), np.ones(n)])
        y = sensor_lag(x, tau, dt)
        t = (np.arange(n) + 1) * dt
        expected = 1.0 - np.exp(-t / tau)
        assert y[5:] == pytest.approx(expected, abs=1e-9)

    def test_settles_to_input(self):
        y = sensor_lag(np.full(500, 3.7), 1.0, 0.1)
        assert y[-1] == pytest.approx(3.7, abs=1e-12)

    def test_negative_tau_rejected(self):
        with pytest.raises(ReceiverError):
            sensor_lag(np.ones(3), -1.0, 0.1)


class TestNoise:
    def test_sigma_zero_is_identity(self):
        x = np.array([1.0, 2.0, 3.0])
        assert np.array_equal(add_noise(x, 0.0, 42), x)

    def test_seed_determinism_and_variation(self):
        x = np.zeros(1000)
        a = add_noise(x, 0.5, 7)
        b = add_noise(x, 0.5, 7)
        c = add_noise(x, 0.5, 8)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_sample_statistics(self):
        noise = add_noise(np.zeros(200_000), 0.5, 1)
        assert np.mean(noise) == pytest.approx(0.0, abs=0.01)
        assert np.std(noise) == pytest.approx(0.5, rel=0.02)


class TestIirLowpass:
    def test_dc_gain_is_exactly_unity(self):
        y = iir_lowpass(np.full(2000, 5.0), 1.0, 10.0)
        assert y == pytest.approx(np.full(2000, 5.0), abs=1e-12)

    def test_tone_attenuation_matches_transfer_function(self):
        fs, fc, f0 = 10.0, 1.0, 3.0
        n = 20000
        t = np.arange(n) / fs
        y = iir_lowpass(np.sin(2 * np.pi * f0 * t), fc, fs)
        # coherent demodulation over an integer number of periods of the
        # sampled sequence (3/10 of fs -> period of 10 samples)
        tail = y[n // 2 :]
        t_tail = t[n // 2 :]
        amp = 2.0 * abs(np.mean(tail * np.exp(-2j * np.pi * f0 * t_tail)))
        a = math.exp(-2 * math.pi * fc / fs)
        assert amp == pytest.approx(oracles.one_pole_lowpass_gain(a, f0, fs), rel=1e-3)

    def test_nyquist_violation_rejected(self):
        with pytest.raises(ConfigurationError):
            iir_lowpass(np.ones(10), cutoff=6.0, sample_rate=10.0)

    def test_empty_input_passthrough(self):
        assert len(iir_lowpass(np.array([]), 1.0, 10.0)) == 0


class TestQuantize:
    def test_error_bounded_by_half_lsb(self):
        lsb = 3300.0 / 4096
        x = np.linspace(-200.0, 300.0, 10001)
        q, clipped = quantize(x, 12, 3300.0)
        assert clipped == 0
        assert np.max(np.abs(q - x)) <= lsb / 2 + 1e-12

    def test_out_of_range_clips_and_counts(self):
        x = np.array([0.0, 2000.0, -2000.0])
        q, clipped = quantize(x, 12, 3300.0)
        assert clipped == 2
        assert q[1] <= 3300.0 / 2
        assert q[2] >= -3300.0 / 2

    def test_idempotent_on_grid_values(self):
        x = np.linspace(-100.0, 100.0, 501)
        q1, _ = quantize(x, 12, 3300.0)
        q2, _ = quantize(q1, 12, 3300.0)
        assert q2 == pytest.approx(q1, abs=1e-12)

    def test_coarse_converter(self):
        q, _ = quantize(np.array([0.3]), 1, 2.0)  # codes at -1 and 0
        assert q[0] == pytest.approx(0.0)


class TestParams:
    def test_defaults_are_consistent(self):
        p = SensorParams()
        assert p.lsb == pytest.approx(3300.0 / 4096)
        assert p.dt == pytest.approx(0.1)

    def test_invalid_configurations_rejected(self):
        with pytest.raises(ConfigurationError):
            SensorParams(sensitivity=0.0)
        with pytest.raises(ConfigurationError):
            SensorParams(tau_s=-1.0)
        with pytest.raises(ConfigurationError):
            SensorParams(sample_rate=1.5, iir_cutoff=1.0)
        with pytest.raises(ConfigurationError):
            SensorParams(adc_bits=0)


class TestMeasure:
    def test_noise_free_dc_reproduced_within_half_lsb(self):
        p = SensorParams(noise_sigma=0.0)
        trace = measure(np.full(600, 6.4), p.dt, p)
        assert abs(trace.values[-1] - 65.0) <= p.lsb / 2

    def test_matching_rate_skips_resampling(self):
        p = SensorParams(noise_sigma=0.0, tau_s=0.0)
        ph = np.array([7.4, 7.4, 6.4, 6.4, 6.4, 6.4, 6.4, 6.4])
        trace = measure(ph, p.dt, p)
        assert len(trace.values) == len(ph)

    def test_resampling_onto_sensor_clock(self):
        p = SensorParams(noise_sigma=0.0, tau_s=0.0)
        ph = np.full(11, 7.4)  # 0.5 s spacing -> 5 s span
        trace = measure(ph, 0.5, p)
        assert len(trace.values) == 51
        assert trace.dt == pytest.approx(0.1)

    def test_out_of_range_ph_warns(self):
        p = SensorParams(noise_sigma=0.0)
        trace = measure(np.array([7.4, 1.0, 7.4]), p.dt, p)
        assert any("range" in w for w in trace.warnings)

    def test_determinism_across_calls(self):
        p = SensorParams(rng_seed=5)
        ph = np.full(200, 6.8)
        a = measure(ph, p.dt, p)
        b = measure(ph, p.dt, p)
        assert np.array_equal(a.values, b.values)

    def test_trace_times(self):
        p = SensorParams(noise_sigma=0.0)
        trace = measure(np.full(30, 7.4), p.dt, p, t0=12.0)
        assert trace.t[0] == pytest.approx(12.0)
        assert trace.t[-1] == pytest.approx(12.0 + 29 * p.dt)

    def test_bad_input_spacing_rejected(self):
        with pytest.raises(ReceiverError):
            measure(np.full(5, 7.4), 0.0, SensorParams())

    @given(
        ph_level=st.floats(3.0, 10.0),
        seed=st.integers(0, 2**32 - 1),
    )
    @settings(max_examples=25, deadline=None)
    def test_settled_output_tracks_transduction(self, ph_level, seed):
        p = SensorParams(noise_sigma=0.0, rng_seed=seed)
        trace = measure(np.full(400, ph_level), p.dt, p)
        ideal = 65.0 * (7.4 - ph_level)
        assert abs(trace.values[-1] - ideal) <= p.lsb / 2 + 1e-9


class TestSensorTrace:
    def test_non_finite_values_rejected(self):
        with pytest.raises(ReceiverError):
            SensorTrace(t0=0.0, dt=0.1, values=np.array([1.0, np.nan]))

    def test_bad_dt_rejected(self):
        with pytest.raises(ReceiverError):
            SensorTrace(t0=0.0, dt=0.0, values=np.array([1.0]))
