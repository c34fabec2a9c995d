"""Flow gating, schedules, and inlet signal sampling."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phlink.transmitter import (
    UL_PER_MIN,
    FlowSchedule,
    GatingCycle,
    GatingLevel,
    GatingModel,
    NoFlowError,
    ResolutionError,
    Segment,
    TransmitterError,
    inlet_signal,
    outlet_flow,
    schedule_from_symbols,
    supply_fraction,
)

CROSS_SECTION = 100e-6 * 100e-6

LEVELS = (
    GatingLevel(0, 7.0, "7/5"),
    GatingLevel(1, 5.0, "5/5"),
    GatingLevel(2, 2.0, "2/5"),
    GatingLevel(3, 0.5, "0.5/5"),
)


class TestSupplyFraction:
    def test_no_gating_flow_passes_everything(self):
        assert supply_fraction(0.0, 5.0, GatingModel()) == 1.0

    def test_critical_flow_blocks_everything(self):
        assert supply_fraction(7.0, 5.0, GatingModel()) == 0.0

    def test_above_critical_clamps_to_zero(self):
        assert supply_fraction(9.0, 5.0, GatingModel()) == 0.0

    def test_half_critical_gives_half(self):
        assert supply_fraction(3.5, 5.0, GatingModel()) == pytest.approx(0.5)

    def test_linear_in_gating_flow(self):
        model = GatingModel()
        for q1 in (0.5, 2.0, 5.0):
            assert supply_fraction(q1, 5.0, model) == pytest.approx(1 - q1 / 7.0)

    def test_no_flow_at_all_raises(self):
        with pytest.raises(NoFlowError):
            supply_fraction(0.0, 0.0, GatingModel())

    def test_negative_rate_rejected(self):
        with pytest.raises(TransmitterError):
            supply_fraction(-1.0, 5.0, GatingModel())


class TestOutletFlow:
    def test_flows_add(self):
        assert outlet_flow(7.0, 5.0) == pytest.approx(12.0)
        assert outlet_flow(0.5, 5.0) == pytest.approx(5.5)

    def test_bulk_velocities_from_default_geometry(self):
        # 12 uL/min through a 100x100 um duct -> 0.02 m/s exactly
        u12 = outlet_flow(7.0, 5.0) * UL_PER_MIN / CROSS_SECTION
        u55 = outlet_flow(0.5, 5.0) * UL_PER_MIN / CROSS_SECTION
        assert u12 == pytest.approx(0.02, rel=1e-12)
        assert u55 == pytest.approx(9.1666666666667e-3, rel=1e-10)


class TestSchedules:
    def test_from_durations_is_gapless(self):
        sched = FlowSchedule.from_durations(
            [(2.0, 7.0, 5.0), (3.0, 0.5, 5.0), (1.0, 7.0, 5.0)]
        )
        assert sched.total_duration == pytest.approx(6.0)
        starts = [seg.start for seg in sched.segments]
        assert starts == pytest.approx([0.0, 2.0, 5.0])

    def test_zero_duration_spans_dropped(self):
        sched = FlowSchedule.from_durations(
            [(2.0, 7.0, 5.0), (0.0, 0.5, 5.0), (1.0, 7.0, 5.0)]
        )
        assert len(sched.segments) == 2
        assert sched.total_duration == pytest.approx(3.0)

    def test_symbol_encoding_structure(self):
        cycle = GatingCycle(t_g=10.0, t_pi=20.0)
        sched = schedule_from_symbols([3, 0], LEVELS, cycle)
        # lead ON, then per symbol: OFF + ON
        assert len(sched.segments) == 5
        assert sched.total_duration == pytest.approx(20 + 2 * 30)
        off1, off2 = sched.segments[1], sched.segments[3]
        assert off1.q1 == pytest.approx(0.5)
        assert off2.q1 == pytest.approx(7.0)

    def test_unknown_symbol_rejected(self):
        cycle = GatingCycle(t_g=10.0, t_pi=20.0)
        with pytest.raises(TransmitterError):
            schedule_from_symbols([4], LEVELS, cycle)

    def test_zero_inter_pulse_time_drops_on_segments(self):
        cycle = GatingCycle(t_g=5.0, t_pi=0.0)
        sched = schedule_from_symbols([3, 3], LEVELS, cycle)
        assert len(sched.segments) == 2
        assert all(seg.q1 == pytest.approx(0.5) for seg in sched.segments)

    def test_overlapping_segments_rejected(self):
        with pytest.raises(TransmitterError):
            FlowSchedule(
                (Segment(0.0, 2.0, 7.0, 5.0), Segment(1.0, 2.0, 0.5, 5.0))
            )

    def test_negative_gate_time_rejected(self):
        with pytest.raises(TransmitterError):
            GatingCycle(t_g=-1.0, t_pi=20.0)
        with pytest.raises(TransmitterError):
            GatingCycle(t_g=0.0, t_pi=20.0)


class TestInletSignal:
    def test_square_wave_sampling(self):
        sched = FlowSchedule.from_durations([(1.0, 7.0, 5.0), (1.0, 0.5, 5.0)])
        sig = inlet_signal(sched, GatingModel(), 0.5, CROSS_SECTION)
        assert sig.n_samples == 4
        assert sig.f_in == pytest.approx([0.0, 0.0, 1 - 0.5 / 7, 1 - 0.5 / 7])
        u_on = 12.0 * UL_PER_MIN / CROSS_SECTION
        u_off = 5.5 * UL_PER_MIN / CROSS_SECTION
        assert sig.u == pytest.approx([u_on, u_on, u_off, u_off])

    def test_boundary_sample_belongs_to_newer_segment(self):
        sched = FlowSchedule.from_durations([(1.0, 7.0, 5.0), (1.0, 0.5, 5.0)])
        sig = inlet_signal(sched, GatingModel(), 1.0, CROSS_SECTION)
        assert sig.f_in == pytest.approx([0.0, 1 - 0.5 / 7])

    def test_unresolvable_segment_rejected(self):
        sched = FlowSchedule.from_durations([(1.0, 7.0, 5.0), (0.05, 0.5, 5.0)])
        with pytest.raises(ResolutionError):
            inlet_signal(sched, GatingModel(), 0.1, CROSS_SECTION)

    def test_empty_schedule_gives_empty_signal(self):
        sig = inlet_signal(FlowSchedule(()), GatingModel(), 0.1, CROSS_SECTION)
        assert sig.n_samples == 0

    @given(
        durations=st.lists(st.floats(0.5, 30.0), min_size=1, max_size=6),
        q1s=st.lists(st.floats(0.0, 9.0), min_size=6, max_size=6),
    )
    @settings(max_examples=40, deadline=None)
    def test_sampled_fraction_always_in_unit_interval(self, durations, q1s):
        parts = [
            (d, q1s[i % len(q1s)], 5.0) for i, d in enumerate(durations)
        ]
        sched = FlowSchedule.from_durations(parts)
        sig = inlet_signal(sched, GatingModel(), 0.25, CROSS_SECTION)
        assert np.all(sig.f_in >= 0.0)
        assert np.all(sig.f_in <= 1.0)
        assert np.all(sig.u > 0.0)
        assert sig.n_samples == int(round(sched.total_duration / 0.25))
