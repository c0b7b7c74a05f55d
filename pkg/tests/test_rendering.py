from __future__ import annotations

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pneusim import (
    FingerSample,
    MalformedTraceError,
    Mesh,
    SceneRenderer,
    SurfaceMaterial,
    crossings,
    estimate_velocity,
    is_touched,
)
from pneusim.rendering import Region

MEAT = SurfaceMaterial(kind="stiffness_surface", temperature_C=13.0, stiffness_N_per_mm=0.5)
ICE = SurfaceMaterial(kind="textured_surface", temperature_C=13.0, grid_pitch_mm=2.0)
BUTTON = SurfaceMaterial(
    kind="button", temperature_C=26.0, click_height_mm=7.0, rearm_margin_mm=0.5
)
REGION = Region(origin_mm=(0.0, 0.0), extent_mm=(80.0, 60.0), height_mm=10.0)


def mesh(material):
    return Mesh(region=REGION, material=material)


def renderer(material, tick_rate=1000.0, **kwargs):
    return SceneRenderer([mesh(material)], ambient_C=26.0, tick_rate_hz=tick_rate, **kwargs)


# ---------------------------------------------------------------------------
# is_touched


def test_touched_inside_below_surface():
    assert is_touched((40.0, 30.0, 9.0), mesh(MEAT))


def test_not_touched_above_surface():
    assert not is_touched((40.0, 30.0, 11.0), mesh(MEAT))


def test_boundary_convention_closed():
    # oracle: enumerate +/- epsilon around every face; the boundary itself counts
    m = mesh(MEAT)
    eps = 1e-9
    on_boundary = [
        (0.0, 30.0, 9.0),
        (80.0, 30.0, 9.0),
        (40.0, 0.0, 9.0),
        (40.0, 60.0, 9.0),
        (40.0, 30.0, 10.0),
    ]
    for p in on_boundary:
        assert is_touched(p, m), p
    outside = [
        (-eps, 30.0, 9.0),
        (80.0 + eps, 30.0, 9.0),
        (40.0, -eps, 9.0),
        (40.0, 60.0 + eps, 9.0),
        (40.0, 30.0, 10.0 + eps),
    ]
    for p in outside:
        assert not is_touched(p, m), p


# ---------------------------------------------------------------------------
# stiffness rendering


def test_first_contact_renders_contact_pressure():
    r = renderer(MEAT)
    tick = r.tick(0.0, (40.0, 30.0, 9.0))
    assert tick.command.target_force_N == 3.0
    assert tick.command.thermal_target_C == 13.0
    assert tick.command.vib_frequency_Hz == 0.0
    assert not tick.clamped


def test_stiffness_force_is_cp_plus_kd():
    r = renderer(MEAT)
    r.tick(0.0, (40.0, 30.0, 10.0))  # contact at the surface
    tick = r.tick(0.001, (40.0, 30.0, 6.0))  # pressed 4 mm
    assert tick.command.target_force_N == pytest.approx(3.0 + 0.5 * 4.0, abs=1e-12)


def test_stiffness_clamps_at_8N_with_flag():
    stiff = SurfaceMaterial(kind="stiffness_surface", temperature_C=13.0, stiffness_N_per_mm=2.0)
    r = renderer(stiff)
    r.tick(0.0, (40.0, 30.0, 10.0))
    tick = r.tick(0.001, (40.0, 30.0, 0.0))  # 10 mm press: raw 23 N
    assert tick.command.target_force_N == 8.0
    assert tick.clamped


def test_lateral_slide_does_not_inflate_force():
    r = renderer(MEAT)
    r.tick(0.0, (40.0, 30.0, 9.0))
    tick = r.tick(0.001, (50.0, 30.0, 9.0))  # 10 mm sideways at constant depth
    assert tick.command.target_force_N == 3.0


def test_literal_indentation_mode_counts_slide():
    r = renderer(MEAT, literal_indentation=True)
    r.tick(0.0, (40.0, 30.0, 9.0))
    tick = r.tick(0.001, (50.0, 30.0, 9.0))
    assert tick.command.target_force_N == pytest.approx(3.0 + 0.5 * 10.0)


def test_indentation_resets_on_recontact():
    r = renderer(MEAT)
    r.tick(0.0, (40.0, 30.0, 10.0))
    r.tick(0.001, (40.0, 30.0, 8.0))
    r.tick(0.002, None)  # lift
    tick = r.tick(0.003, (40.0, 30.0, 8.0))  # fresh contact at depth
    assert tick.command.target_force_N == 3.0


# ---------------------------------------------------------------------------
# crossings


def subdivision_crossings(p_prev, p_curr, pitch, axis="x", resolution_mm=0.001):
    """Brute-force oracle: subdivide the segment and count cell-index changes."""
    i = 0 if axis == "x" else 1
    a, b = p_prev[i], p_curr[i]
    length = abs(b - a)
    steps = max(1, int(math.ceil(length / resolution_mm)))
    count = 0
    prev_cell = math.floor(a / pitch)
    for k in range(1, steps + 1):
        # pin the final sample to the exact endpoint: a + (b-a)*1.0 can lose
        # tiny endpoints to rounding
        x = b if k == steps else a + (b - a) * (k / steps)
        cell = math.floor(x / pitch)
        if cell != prev_cell:
            count += abs(cell - prev_cell)
            prev_cell = cell
    return count


def test_crossings_within_one_cell():
    assert crossings((0.5, 0, 9), (0.9, 0, 9), 2.0) == 0


def test_crossings_spec_stroke():
    assert crossings((0.0, 0, 9), (10.0, 0, 9), 2.0) == 5
    assert subdivision_crossings((0.0, 0, 9), (10.0, 0, 9), 2.0) == 5


def test_crossings_bidirectional_boundary_landing():
    assert crossings((3.9, 0, 9), (4.1, 0, 9), 2.0) == 1
    assert crossings((4.1, 0, 9), (3.9, 0, 9), 2.0) == 1
    # landing exactly on the line counts once, for the entering segment
    assert crossings((3.9, 0, 9), (4.0, 0, 9), 2.0) == 1
    assert crossings((4.0, 0, 9), (4.1, 0, 9), 2.0) == 0


def test_crossings_y_axis():
    assert crossings((0, 0.5, 9), (0, 7.5, 9), 2.0, axis="y") == 3


@settings(max_examples=120, deadline=None)
@given(
    a=st.floats(min_value=-50.0, max_value=50.0),
    b=st.floats(min_value=-50.0, max_value=50.0),
    pitch=st.floats(min_value=0.3, max_value=10.0),
)
def test_crossings_match_subdivision_oracle(a, b, pitch):
    got = crossings((a, 0, 9), (b, 0, 9), pitch)
    want = subdivision_crossings((a, 0, 9), (b, 0, 9), pitch)
    assert got == want


# ---------------------------------------------------------------------------
# texture rendering


def test_stationary_touch_on_ice():
    r = renderer(ICE)
    for k in range(50):
        tick = r.tick(k * 0.001, (40.5, 30.0, 9.0))
        assert tick.command.target_force_N == 3.0
        assert tick.command.thermal_target_C == 13.0
        assert tick.vib_events == 0
        assert tick.command.vib_frequency_Hz == 0.0


def test_stroke_crossing_five_lines_emits_five_events():
    r = renderer(ICE)
    # x from 0.5 to 10.5 crosses 2,4,6,8,10
    total = 0
    n = 100
    for k in range(n + 1):
        x = 0.5 + 10.0 * k / n
        total += r.tick(k * 0.001, (x, 30.0, 9.0)).vib_events
    assert total == 5


def test_burst_events_match_oracle_on_random_stroke():
    rng = random.Random(42)
    r = renderer(ICE)
    x = 10.0
    prev = (x, 30.0, 9.0)
    total = 0
    oracle = 0
    for k in range(500):
        x = min(max(x + rng.uniform(-0.8, 0.9), 0.0), 80.0)
        curr = (x, 30.0, 9.0)
        total += r.tick(k * 0.001, curr).vib_events
        if k > 0:
            oracle += subdivision_crossings(prev, curr, 2.0)
        prev = curr
    assert total == oracle


def test_burst_frequency_scales_with_speed():
    # identical paths at v and 2v: burst cycle frequency strictly greater at 2v
    def run(speed_mm_s):
        r = renderer(ICE, tick_rate=1000.0)
        freqs = []
        for k in range(1000):
            t = k * 0.001
            tick = r.tick(t, (speed_mm_s * t, 30.0, 9.0))
            if tick.vib_events:
                freqs.append(tick.command.vib_frequency_Hz)
        return freqs

    slow = run(20.0)
    fast = run(40.0)
    assert slow and fast
    assert max(slow) < min(fast)
    assert min(fast) == pytest.approx(40.0 / 2.0, rel=0.15)


def test_burst_strength_mapping_monotone():
    # mapping v -> clamp(v/pitch, 1, cap) is non-decreasing over its domain
    r = renderer(ICE)
    cap = r.burst_cap_hz
    prev = 0.0
    for v in [0.0, 0.5, 1.0, 5.0, 50.0, 200.0, 400.0, 1000.0]:
        f = min(max(v / ICE.grid_pitch_mm, 1.0), cap)
        assert f >= prev
        prev = f


def test_continuous_stroking_coalesces_into_continuous_cycling():
    r = renderer(ICE, tick_rate=1000.0)
    active = 0
    for k in range(1000):
        t = k * 0.001
        tick = r.tick(t, (40.0 * t, 30.0, 9.0))  # 40 mm/s -> 20 Hz crossing rate
        if k > 200:  # after spin-up
            active += tick.command.vib_frequency_Hz > 0.0
    assert active >= 780  # cycling nearly continuously


def test_off_surface_emits_null_command():
    r = renderer(ICE)
    r.tick(0.0, (40.0, 30.0, 9.0))
    for k, position in enumerate([(40.0, 30.0, 12.0), (90.0, 30.0, 9.0), None]):
        tick = r.tick(0.001 * (k + 1), position)
        assert tick.command.target_force_N == 0.0
        assert tick.command.vib_frequency_Hz == 0.0
        assert tick.command.thermal_target_C is None
        assert tick.vib_events == 0


# ---------------------------------------------------------------------------
# button rendering


def press(r, z_path, t0=0.0):
    events = 0
    for k, z in enumerate(z_path):
        events += r.tick(t0 + k * 0.001, (40.0, 30.0, z)).vib_events
    return events


def test_monotone_press_fires_once():
    r = renderer(BUTTON)
    zs = [10.0 - 0.1 * k for k in range(50)]  # 10 -> 5.1
    assert press(r, zs) == 1


def test_shallow_press_fires_nothing():
    r = renderer(BUTTON)
    zs = [10.0 - 0.05 * k for k in range(50)]  # 10 -> 7.55, above the click plane
    assert press(r, zs) == 0


def test_jitter_below_rearm_margin_fires_once_per_full_press():
    r = renderer(BUTTON)
    down = [10.0, 9.0, 8.0, 7.2, 6.9]  # crosses 7.0
    jitter = [7.1, 6.9, 7.1, 6.9, 7.1]  # within the 0.5 mm margin
    release = [7.2, 7.6, 8.0, 9.0]  # above 7.5: re-arms
    down2 = [8.0, 7.4, 6.9]
    total = press(r, down) + press(r, jitter, 0.1) + press(r, release, 0.2) + press(r, down2, 0.3)
    assert total == 2


def test_button_idempotent_across_replays():
    zs = [10.0, 9.0, 8.0, 6.9, 6.5, 7.1, 8.0, 9.0, 11.0]
    single = press(renderer(BUTTON), zs)
    for n in (2, 5):
        r = renderer(BUTTON)
        total = 0
        for i in range(n):
            total += press(r, zs, t0=i)
            r.reset()
        # reset between replays gives exactly n x the single count
        assert total == n * single


def test_click_pulse_is_maximal_amplitude():
    r = renderer(BUTTON)
    r.tick(0.0, (40.0, 30.0, 10.0))
    tick = r.tick(0.001, (40.0, 30.0, 6.9))
    assert tick.vib_events == 1
    assert tick.command.vib_frequency_Hz == 80.0  # peak-response frequency
    assert tick.command.vib_supply_psi == 10.0


# ---------------------------------------------------------------------------
# velocity estimation


def linear_samples(speed_mm_s, rate_hz=100.0, n=20, sigma=0.0, rng=None):
    samples = []
    for i in range(n):
        t = i / rate_hz
        x = speed_mm_s * t
        y = 0.0
        if rng is not None:
            x += rng.gauss(0.0, sigma)
            y += rng.gauss(0.0, sigma)
        samples.append(FingerSample(t=t, position=(x, y, 9.0)))
    return samples


def test_velocity_exact_linear_motion():
    samples = linear_samples(10.0)
    assert estimate_velocity(samples) == pytest.approx(10.0, rel=1e-9)


def test_velocity_stationary():
    samples = [FingerSample(t=i * 0.01, position=(5.0, 5.0, 9.0)) for i in range(10)]
    assert estimate_velocity(samples) == 0.0


def test_velocity_duplicate_timestamps_rejected():
    samples = [
        FingerSample(t=0.0, position=(0.0, 0.0, 9.0)),
        FingerSample(t=0.0, position=(1.0, 0.0, 9.0)),
    ]
    with pytest.raises(MalformedTraceError):
        estimate_velocity(samples)


def test_velocity_ignores_z_component():
    samples = [FingerSample(t=i * 0.01, position=(0.0, 0.0, 9.0 - i)) for i in range(5)]
    assert estimate_velocity(samples) == 0.0


def test_velocity_noisy_linear_within_15_percent():
    # synthetic-trace oracle with seeded noise: mean estimate over the trace
    rng = random.Random(2024)
    samples = linear_samples(10.0, rate_hz=100.0, n=200, sigma=0.05, rng=rng)
    estimates = [
        estimate_velocity(samples[: i + 1]) for i in range(4, len(samples))
    ]
    mean = sum(estimates) / len(estimates)
    assert abs(mean - 10.0) / 10.0 < 0.15
