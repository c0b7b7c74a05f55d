from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pneusim import (
    ForceState,
    OutOfRangeError,
    SafetyViolationError,
    ThermalState,
    exhaust_step,
    force_from_inflation,
    thermal_steady_state,
    thermal_step,
    vibration_amplitude,
)
from pneusim.actuator import exhaust_tau_ms, saturation_force
from pneusim.interp import PiecewiseLinear

# ---------------------------------------------------------------------------
# interpolator


def test_interpolator_matches_numpy_inside_range():
    xs = [0.0, 1.0, 2.5, 7.0]
    ys = [1.0, -2.0, 4.0, 4.5]
    pl = PiecewiseLinear(xs, ys)
    probe = np.linspace(0.0, 7.0, 101)
    expected = np.interp(probe, xs, ys)
    for x, want in zip(probe, expected):
        assert pl(float(x)) == pytest.approx(float(want), abs=1e-12)


def test_interpolator_exact_at_nodes():
    xs = [0.0, 0.1, 0.2, 0.3]
    ys = [0.1, 0.3, 0.7, 1.5]
    pl = PiecewiseLinear(xs, ys)
    for x, y in zip(xs, ys):
        assert pl(x) == y  # bitwise, not approx


def test_interpolator_rejects_out_of_range():
    pl = PiecewiseLinear([0.0, 1.0], [0.0, 1.0])
    with pytest.raises(OutOfRangeError):
        pl(-0.001)
    with pytest.raises(OutOfRangeError):
        pl(1.001)


@settings(max_examples=50, deadline=None)
@given(
    nodes=st.lists(
        st.tuples(
            st.floats(min_value=-100, max_value=100, allow_nan=False),
            st.floats(min_value=-100, max_value=100, allow_nan=False),
        ),
        min_size=2,
        max_size=8,
        unique_by=lambda p: round(p[0], 3),
    ),
    u=st.floats(min_value=0.0, max_value=1.0),
)
def test_interpolator_agrees_with_numpy_property(nodes, u):
    nodes = sorted(nodes)
    xs = [x for x, _ in nodes]
    ys = [y for _, y in nodes]
    if any(b - a < 1e-6 for a, b in zip(xs, xs[1:])):
        return
    pl = PiecewiseLinear(xs, ys)
    x = xs[0] + u * (xs[-1] - xs[0])
    assert pl(x) == pytest.approx(float(np.interp(x, xs, ys)), abs=1e-9)


# ---------------------------------------------------------------------------
# thermal


def test_steady_state_paper_anchor(tables):
    assert thermal_steady_state(tables, 6.00) == pytest.approx(13.0, abs=0.1)


def test_steady_state_zero_flow_is_ambient(tables):
    assert thermal_steady_state(tables, 0.0) == 26.0


def test_steady_state_bracketed_between_neighbors(tables):
    mid = thermal_steady_state(tables, 4.78)
    hi = thermal_steady_state(tables, 4.11)
    lo = thermal_steady_state(tables, 5.44)
    assert lo < mid < hi


def test_steady_state_monotone_non_increasing(tables):
    grid = [i * 0.05 for i in range(int(6.00 / 0.05) + 1)]
    values = [thermal_steady_state(tables, p) for p in grid]
    for a, b in zip(values, values[1:]):
        assert b <= a + 1e-12


def test_steady_state_rejects_extrapolation(tables):
    with pytest.raises(OutOfRangeError):
        thermal_steady_state(tables, 6.01)
    with pytest.raises(OutOfRangeError):
        thermal_steady_state(tables, -0.1)


def test_cooling_reaches_14C_by_3s_at_6bar(tables):
    state = ThermalState(26.0, 6.00)
    for _ in range(3000):
        state = thermal_step(state, tables, 0.001)
    assert state.contact_temp_C <= 14.0


def test_ambient_is_zero_flow_fixed_point(tables):
    state = ThermalState(26.0, 0.0)
    for dt in (0.001, 0.1, 2.0):
        state = thermal_step(state, tables, dt)
        assert state.contact_temp_C == pytest.approx(26.0, abs=1e-12)


def test_recovery_monotone_to_ambient(tables):
    # independent oracle: forward integration, checking monotonicity numerically
    state = ThermalState(13.0, 0.0)
    prev = state.contact_temp_C
    for _ in range(60000):
        state = thermal_step(state, tables, 0.001)
        assert prev <= state.contact_temp_C <= 26.0
        prev = state.contact_temp_C
    assert state.contact_temp_C == pytest.approx(26.0, abs=0.05)


def test_cooling_never_overshoots_target(tables):
    for pressure in (3.42, 4.5, 6.00):
        target = thermal_steady_state(tables, pressure)
        state = ThermalState(26.0, pressure)
        for _ in range(20000):
            state = thermal_step(state, tables, 0.001)
            assert target - 1e-9 <= state.contact_temp_C <= 26.0 + 1e-9


def test_deeper_recovery_stays_pointwise_colder(tables):
    shallow = ThermalState(20.0, 0.0)
    deep = ThermalState(13.0, 0.0)
    for _ in range(20000):
        shallow = thermal_step(shallow, tables, 0.001)
        deep = thermal_step(deep, tables, 0.001)
        assert deep.contact_temp_C <= shallow.contact_temp_C + 1e-12


@settings(max_examples=30, deadline=None)
@given(
    p1=st.floats(min_value=0.5, max_value=6.0),
    p2=st.floats(min_value=0.5, max_value=6.0),
)
def test_trajectory_pointwise_ordered_by_pressure(tables, p1, p2):
    lo, hi = sorted((p1, p2))
    a = ThermalState(26.0, lo)
    b = ThermalState(26.0, hi)
    for _ in range(500):
        a = thermal_step(a, tables, 0.002)
        b = thermal_step(b, tables, 0.002)
        assert b.contact_temp_C <= a.contact_temp_C + 1e-12


def test_thermal_step_rejects_nonpositive_dt(tables):
    with pytest.raises(ValueError):
        thermal_step(ThermalState(26.0, 0.0), tables, 0.0)


# ---------------------------------------------------------------------------
# force


def test_force_saturation_anchor(tables):
    assert force_from_inflation(tables, 10.0, 200.0) == 8.0


def test_force_zero_duration(tables):
    for psi in (5.0, 7.3, 10.0):
        assert force_from_inflation(tables, psi, 0.0) == 0.0


def test_force_plateau_not_growth(tables):
    assert force_from_inflation(tables, 10.0, 240.0) == 8.0
    assert force_from_inflation(tables, 10.0, 250.0) == 8.0


def test_force_plateau_flat_on_200_to_250(tables):
    values = {force_from_inflation(tables, 10.0, ms) for ms in range(200, 251)}
    assert values == {8.0}


def test_force_bilinear_between_series(tables):
    # midpoint of 2.5 N (5 psi) and 5.2 N (10 psi) at 100 ms
    assert force_from_inflation(tables, 7.5, 100.0) == pytest.approx(3.85, abs=1e-12)


def test_force_monotone_in_duration(tables):
    for psi in (5.0, 6.5, 10.0):
        prev = -1.0
        for ms in range(0, 251, 2):
            f = force_from_inflation(tables, psi, float(ms))
            assert f >= prev
            prev = f


def test_force_monotone_in_pressure(tables):
    for ms in range(0, 241, 20):
        prev = -1.0
        for psi in (5.0, 6.0, 7.0, 8.0, 9.0, 10.0):
            f = force_from_inflation(tables, psi, float(ms))
            assert f >= prev
            prev = f


@settings(max_examples=80, deadline=None)
@given(
    psi=st.floats(min_value=5.0, max_value=10.0),
    ms1=st.floats(min_value=0.0, max_value=250.0),
    ms2=st.floats(min_value=0.0, max_value=250.0),
)
def test_force_monotonicity_property(tables, psi, ms1, ms2):
    lo, hi = sorted((ms1, ms2))
    assert force_from_inflation(tables, psi, lo) <= force_from_inflation(tables, psi, hi) + 1e-12


def test_force_over_250ms_at_10psi_is_safety_violation(tables):
    with pytest.raises(SafetyViolationError):
        force_from_inflation(tables, 10.0, 251.0)


def test_force_over_250ms_below_10psi_is_out_of_range(tables):
    with pytest.raises(OutOfRangeError):
        force_from_inflation(tables, 5.0, 251.0)


def test_force_pressure_out_of_range(tables):
    with pytest.raises(OutOfRangeError):
        force_from_inflation(tables, 4.9, 100.0)
    with pytest.raises(OutOfRangeError):
        force_from_inflation(tables, 10.1, 100.0)


def test_saturation_force(tables):
    assert saturation_force(tables, 10.0) == 8.0
    assert saturation_force(tables, 5.0) == 4.5


# ---------------------------------------------------------------------------
# exhaust


def test_exhaust_completes_within_50ms(tables):
    state = ForceState(membrane_force_N=8.0, sealed=True)
    for _ in range(50):
        state = exhaust_step(state, tables, 0.001)
    assert state.membrane_force_N < 0.08
    assert not state.sealed


def test_exhaust_zero_fixed_point(tables):
    state = ForceState(membrane_force_N=0.0)
    state = exhaust_step(state, tables, 0.010)
    assert state.membrane_force_N == 0.0


def test_exhaust_midwindow_value(tables):
    # oracle: evaluate the fitted exponential at half the decay window:
    # tau = 40 / ln(100) ms, so F(25 ms) = 8 * exp(-25/tau) = 0.449874...
    tau = tables.exhaust_nominal_ms / math.log(100.0)
    expected = 8.0 * math.exp(-25.0 / tau)
    assert expected == pytest.approx(0.449874, abs=1e-5)

    state = ForceState(membrane_force_N=8.0, sealed=True)
    for _ in range(25):
        state = exhaust_step(state, tables, 0.001)
    assert state.membrane_force_N == pytest.approx(expected, rel=1e-9)
    assert 0.08 < state.membrane_force_N < 8.0


def test_exhaust_tau_matches_one_percent_at_nominal(tables):
    tau = exhaust_tau_ms(tables)
    assert math.exp(-tables.exhaust_nominal_ms / tau) == pytest.approx(0.01, rel=1e-9)


# ---------------------------------------------------------------------------
# vibration


def test_vibration_anchors_exact(tables):
    assert vibration_amplitude(tables, 10.0) == 1.2
    assert vibration_amplitude(tables, 80.0) == 1.7
    assert vibration_amplitude(tables, 150.0) == 1.1
    assert vibration_amplitude(tables, 200.0) == 0.6
    assert vibration_amplitude(tables, 1.0) == 1.2


def test_vibration_interpolation_bracket(tables):
    amp = vibration_amplitude(tables, 45.0)
    assert 1.2 < amp < 1.7
    assert amp == pytest.approx(1.45, abs=1e-12)


def test_vibration_above_perception_threshold_everywhere(tables):
    f = 1.0
    while f <= 200.0:
        assert vibration_amplitude(tables, f) > 0.003
        f += 0.5


def test_vibration_rejects_out_of_band(tables):
    with pytest.raises(OutOfRangeError):
        vibration_amplitude(tables, 0.5)
    with pytest.raises(OutOfRangeError):
        vibration_amplitude(tables, 200.5)
