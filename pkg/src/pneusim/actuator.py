"""Empirical physics model of the silicone actuator and vortex-tube cooler.

All operations are pure: state in, state out. Units follow the hardware's
mixed convention (bar for the vortex supply, psi for the chamber supply, N
for membrane force, °C for contact temperature, g for vibration amplitude).

Cooling/recovery dynamics are a first-order lag toward a pressure-dependent
steady state:

    dT/dt = (T_target - T) / tau

integrated exactly per step, so the temperature approaches its target
monotonically and can never overshoot. During recovery (no flow) the time
constant is taken from the cooling fit at the pressure whose steady state
matches the current temperature, scaled by a recovery factor; the resulting
autonomous dynamics keep deeper-cooled trajectories pointwise colder while
warming back to ambient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .calibration import (
    CalibrationTables,
    MAX_VALVE_OPEN_MS,
    SAFETY_SUPPLY_PSI,
    VIBRATION_MAX_HZ,
    VIBRATION_MIN_HZ,
)
from .errors import OutOfRangeError, SafetyViolationError
from .interp import PiecewiseLinear

DEFAULT_RECOVERY_FACTOR = 2.0

# Exhaust completes (force below this fraction of its start value) within the
# calibrated release window.
EXHAUST_COMPLETE_FRACTION = 0.01


@dataclass(frozen=True)
class ThermalState:
    """Instantaneous contact temperature and the active vortex supply."""

    contact_temp_C: float
    input_pressure_bar: float = 0.0


@dataclass(frozen=True)
class ForceState:
    """Lower-chamber membrane force; sealed means all valves closed with air trapped."""

    membrane_force_N: float = 0.0
    sealed: bool = False


# ---------------------------------------------------------------------------
# Derived interpolants (cached per tables instance)

_CACHE: dict[int, dict] = {}


def _derived(tables: CalibrationTables) -> dict:
    cached = _CACHE.get(id(tables))
    if cached is not None and cached["ref"] is tables:
        return cached
    fits = tables.thermal_fits
    pressures = [f.pressure_bar for f in fits]
    steadies = [f.steady_C for f in fits]
    taus = [f.tau_s for f in fits]
    cached = {
        "ref": tables,  # keep the tables alive so id() stays unambiguous
        # steady state vs pressure, with the no-flow anchor at ambient
        "steady": PiecewiseLinear([0.0] + pressures, [tables.thermal_ambient_C] + steadies),
        # cooling time constant vs pressure, clamped below the characterized span
        "tau": PiecewiseLinear([0.0] + pressures, [taus[0]] + taus),
        # cooling time constant vs steady temperature (for recovery dynamics);
        # steadies decrease with pressure, so reverse for increasing x
        "tau_by_temp": PiecewiseLinear(list(reversed(steadies)), list(reversed(taus))),
        "force": {p: PiecewiseLinear([ms for ms, _ in c], [f for _, f in c]) for p, c in tables.force_curve},
        "vibration": PiecewiseLinear(
            [f for f, _ in tables.vibration_response],
            [a for _, a in tables.vibration_response],
        ),
        "exhaust_tau_ms": tables.exhaust_nominal_ms / math.log(1.0 / EXHAUST_COMPLETE_FRACTION),
    }
    _CACHE[id(tables)] = cached
    return cached


def exhaust_tau_ms(tables: CalibrationTables) -> float:
    return _derived(tables)["exhaust_tau_ms"]


# ---------------------------------------------------------------------------
# Thermal channel


def thermal_steady_state(tables: CalibrationTables, input_pressure_bar: float) -> float:
    """Asymptotic contact temperature for sustained flow at the given supply.

    0 bar means no flow (ambient). Linear interpolation between characterized
    pressures; anything above the highest characterized pressure is an error.
    """
    if input_pressure_bar < 0:
        raise OutOfRangeError(f"negative supply pressure {input_pressure_bar} bar")
    return _derived(tables)["steady"](input_pressure_bar)


def thermal_time_constant(tables: CalibrationTables, input_pressure_bar: float) -> float:
    """Fitted cooling time constant (s) at the given supply pressure."""
    if input_pressure_bar < 0:
        raise OutOfRangeError(f"negative supply pressure {input_pressure_bar} bar")
    return _derived(tables)["tau"](input_pressure_bar)


def recovery_time_constant(
    tables: CalibrationTables,
    contact_temp_C: float,
    recovery_factor: float = DEFAULT_RECOVERY_FACTOR,
) -> float:
    """Warming time constant at the current temperature (no-flow recovery)."""
    tau_by_temp = _derived(tables)["tau_by_temp"]
    temp = min(max(contact_temp_C, tau_by_temp.x_min), tau_by_temp.x_max)
    return recovery_factor * tau_by_temp(temp)


def thermal_step(
    state: ThermalState,
    tables: CalibrationTables,
    dt: float,
    recovery_factor: float = DEFAULT_RECOVERY_FACTOR,
) -> ThermalState:
    """Advance the contact temperature by dt seconds of first-order relaxation."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    pressure = state.input_pressure_bar
    if pressure > 0:
        target = thermal_steady_state(tables, pressure)
        tau = thermal_time_constant(tables, pressure)
    else:
        target = tables.thermal_ambient_C
        tau = recovery_time_constant(tables, state.contact_temp_C, recovery_factor)
    decay = math.exp(-dt / tau)
    temp = target + (state.contact_temp_C - target) * decay
    return ThermalState(contact_temp_C=temp, input_pressure_bar=pressure)


# ---------------------------------------------------------------------------
# Pressure channel


def force_from_inflation(
    tables: CalibrationTables, source_pressure_psi: float, valve_open_ms: float
) -> float:
    """Membrane force after opening the inlet for valve_open_ms at the given supply.

    Piecewise-linear within each characterized series, linear between the two
    supply pressures, and flat past each series' last node up to 250 ms
    (saturation plateau). Durations beyond 250 ms at >= 10 psi are a safety
    violation, never a silent clamp.
    """
    if valve_open_ms < 0:
        raise OutOfRangeError(f"negative valve opening {valve_open_ms} ms")
    if valve_open_ms > MAX_VALVE_OPEN_MS:
        if source_pressure_psi >= SAFETY_SUPPLY_PSI:
            raise SafetyViolationError(
                f"inlet open {valve_open_ms} ms at {source_pressure_psi} psi exceeds "
                f"the {MAX_VALVE_OPEN_MS} ms damage limit"
            )
        raise OutOfRangeError(
            f"valve opening {valve_open_ms} ms beyond the characterized {MAX_VALVE_OPEN_MS} ms"
        )
    series = _derived(tables)["force"]
    pressures = tables.force_pressures_psi
    if not (pressures[0] <= source_pressure_psi <= pressures[-1]):
        raise OutOfRangeError(
            f"supply {source_pressure_psi} psi outside characterized "
            f"[{pressures[0]}, {pressures[-1]}] psi"
        )

    def eval_series(psi: float) -> float:
        pl = series[psi]
        return pl(min(valve_open_ms, pl.x_max))  # flat plateau past the last node

    if source_pressure_psi in series:
        return eval_series(source_pressure_psi)
    # linear between the bracketing characterized supplies
    lo = max(p for p in pressures if p < source_pressure_psi)
    hi = min(p for p in pressures if p > source_pressure_psi)
    t = (source_pressure_psi - lo) / (hi - lo)
    return eval_series(lo) + t * (eval_series(hi) - eval_series(lo))


def saturation_force(tables: CalibrationTables, source_pressure_psi: float) -> float:
    """Highest force reachable at the given supply (value at the 250 ms limit)."""
    return force_from_inflation(tables, source_pressure_psi, MAX_VALVE_OPEN_MS)


def exhaust_step(state: ForceState, tables: CalibrationTables, dt: float) -> ForceState:
    """Advance the exhaust decay by dt seconds with the valve open."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    tau_s = exhaust_tau_ms(tables) / 1000.0
    force = state.membrane_force_N * math.exp(-dt / tau_s)
    if force < 1e-12:
        force = 0.0
    return ForceState(membrane_force_N=force, sealed=False)


# ---------------------------------------------------------------------------
# Vibration channel


def vibration_amplitude(tables: CalibrationTables, frequency_Hz: float) -> float:
    """Peak acceleration amplitude (g) at the given drive frequency."""
    if not (VIBRATION_MIN_HZ <= frequency_Hz <= VIBRATION_MAX_HZ):
        raise OutOfRangeError(
            f"frequency {frequency_Hz} Hz outside [{VIBRATION_MIN_HZ}, {VIBRATION_MAX_HZ}]"
        )
    return _derived(tables)["vibration"](frequency_Hz)
