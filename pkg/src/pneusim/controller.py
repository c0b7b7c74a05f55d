"""Discrete-time valve/regulator controller.

Turns per-tick haptic commands into valve-bank states and regulator
setpoints:

* lower chamber (pressure): open-loop fill-and-seal. A force target is
  planned as an inlet opening duration via inverse interpolation of the
  force calibration; increases top up the sealed charge, decreases vent the
  chamber fully and re-inflate to the new target.
* upper chamber (vibration): the inlet/exhaust pair cycles so the opening
  fundamental equals the commanded frequency, one inflate+exhaust cycle per
  period with a 50% duty split (remainder ticks go to the exhaust phase).
* vortex supply: setpoint from inverse interpolation of the fitted cooling
  steady states.

A safety interlock prevents any inlet valve from staying open longer than
250 ms at a supply of 10 psi or more; a tick that would cross the limit is
aborted with the bank forced to all-exhaust and the violation reported.

Concurrency: a single logical writer advances one ControllerState; tick()
mutates and returns that state. States may be handed between threads but
never shared.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .actuator import saturation_force
from .calibration import (
    CalibrationTables,
    MAX_VALVE_OPEN_MS,
    SAFETY_SUPPLY_PSI,
    VIBRATION_MAX_HZ,
    VIBRATION_MIN_HZ,
    VORTEX_MAX_BAR,
    VORTEX_MIN_BAR,
)
from .errors import InfeasibleTargetError, OutOfRangeError

MAX_COMMAND_FORCE_N = 8.0
DEFAULT_FORCE_SUPPLY_PSI = 10.0
DEFAULT_VIB_SUPPLY_PSI = 5.0
# Tolerance when matching thermal targets against the coldest fitted steady
# state (absorbs fit jitter around the nominal 13 C floor).
THERMAL_TARGET_TOL_C = 0.01


@dataclass(frozen=True)
class ValveBank:
    """Solenoid states. pv = inlet, nv = exhaust; lower chamber renders
    pressure, upper chamber renders vibration."""

    pv_lower: bool = False
    nv_lower: bool = False
    pv_upper: bool = False
    nv_upper: bool = False


ALL_CLOSED = ValveBank()
ALL_EXHAUST = ValveBank(pv_lower=False, nv_lower=True, pv_upper=False, nv_upper=True)


@dataclass(frozen=True)
class RegulatorSetpoints:
    chamber_supply_psi: float = 0.0
    vortex_supply_bar: float = 0.0


@dataclass(frozen=True)
class HapticCommand:
    """Renderer output for one tick. thermal_target_C None means ambient (off)."""

    target_force_N: float = 0.0
    vib_frequency_Hz: float = 0.0
    vib_supply_psi: float = DEFAULT_VIB_SUPPLY_PSI
    thermal_target_C: float | None = None


NULL_COMMAND = HapticCommand()


@dataclass(frozen=True)
class SafetyViolation:
    tick: int
    valve: str
    open_ms: float
    supply_psi: float

    def describe(self) -> str:
        return (
            f"tick {self.tick}: inlet {self.valve} would be open {self.open_ms:.0f} ms "
            f"at {self.supply_psi:g} psi (limit {MAX_VALVE_OPEN_MS:.0f} ms at "
            f">= {SAFETY_SUPPLY_PSI:g} psi)"
        )


@dataclass
class ControllerState:
    tick_index: int = 0
    command: HapticCommand = NULL_COMMAND
    # lower chamber bookkeeping
    lower_phase: str = "idle"  # idle | inflate | seal | exhaust
    charged_ticks: int = 0
    exhaust_remaining: int = 0
    # vibration bookkeeping (phase-accumulator cycling)
    vib_active_hz: float = 0.0
    vib_cycle_len: int = 0
    vib_inflate_len: int = 0
    vib_cycle_pos: int = 0
    vib_frac: float = 0.0
    # continuous open time per inlet valve (ms)
    pv_lower_open_ms: float = 0.0
    pv_upper_open_ms: float = 0.0
    violations: int = 0

    def clone(self) -> "ControllerState":
        return replace(self, command=self.command)


@dataclass(frozen=True)
class TickOutput:
    state: ControllerState
    bank: ValveBank
    setpoints: RegulatorSetpoints
    violation: SafetyViolation | None = None


# ---------------------------------------------------------------------------
# Planners


def plan_inflation(
    tables: CalibrationTables,
    target_force_N: float,
    source_pressure_psi: float,
    tick_rate_hz: float = 1000.0,
) -> float:
    """Smallest tick-quantized inlet opening (ms) whose force meets the target."""
    ticks = plan_inflation_ticks(tables, target_force_N, source_pressure_psi, tick_rate_hz)
    return ticks * 1000.0 / tick_rate_hz


def plan_inflation_ticks(
    tables: CalibrationTables,
    target_force_N: float,
    source_pressure_psi: float,
    tick_rate_hz: float = 1000.0,
) -> int:
    if target_force_N < 0:
        raise OutOfRangeError(f"negative force target {target_force_N} N")
    if target_force_N == 0:
        return 0
    max_force = saturation_force(tables, source_pressure_psi)
    if target_force_N > max_force:
        raise InfeasibleTargetError(
            f"target {target_force_N} N exceeds the {max_force:g} N maximum achievable "
            f"at {source_pressure_psi:g} psi",
            max_achievable=max_force,
        )
    tick_ms = 1000.0 / tick_rate_hz
    from .actuator import force_from_inflation

    def force_at(ticks: int) -> float:
        return force_from_inflation(
            tables, source_pressure_psi, min(ticks * tick_ms, MAX_VALVE_OPEN_MS)
        )

    # binary search for the first satisfying tick (force is non-decreasing)
    lo_ticks = 0
    hi_ticks = int(math.ceil(MAX_VALVE_OPEN_MS / tick_ms))
    while lo_ticks < hi_ticks:
        mid = (lo_ticks + hi_ticks) // 2
        if force_at(mid) >= target_force_N:
            hi_ticks = mid
        else:
            lo_ticks = mid + 1
    return lo_ticks


def plan_thermal(tables: CalibrationTables, thermal_target_C: float | None) -> float:
    """Minimal vortex supply (bar) whose steady state is at or below the target.

    The regulator can only sustain {0} ∪ [3.42, 6.00] bar, so targets milder
    than the 3.42 bar steady state still map to 3.42 bar (overcooled); 0 bar
    only when the target is ambient.
    """
    ambient = tables.thermal_ambient_C
    if thermal_target_C is None or thermal_target_C >= ambient:
        if thermal_target_C is not None and thermal_target_C > ambient:
            raise OutOfRangeError(
                f"thermal target {thermal_target_C} C above ambient {ambient} C "
                "(no heating channel)"
            )
        return 0.0
    fits = tables.thermal_fits
    coldest = fits[-1].steady_C
    if thermal_target_C < coldest - THERMAL_TARGET_TOL_C:
        raise InfeasibleTargetError(
            f"thermal target {thermal_target_C} C below the {coldest:.2f} C floor",
            max_achievable=coldest,
        )
    if thermal_target_C <= coldest:
        return fits[-1].pressure_bar
    if thermal_target_C >= fits[0].steady_C:
        return fits[0].pressure_bar
    # inverse interpolation on the (pressure, steady) polyline
    for lo, hi in zip(fits, fits[1:]):
        if hi.steady_C <= thermal_target_C <= lo.steady_C:
            t = (lo.steady_C - thermal_target_C) / (lo.steady_C - hi.steady_C)
            return lo.pressure_bar + t * (hi.pressure_bar - lo.pressure_bar)
    raise AssertionError("unreachable: target inside fitted span")


# ---------------------------------------------------------------------------
# Controller


class ValveController:
    def __init__(
        self,
        tables: CalibrationTables,
        tick_rate_hz: float = 1000.0,
        force_supply_psi: float = DEFAULT_FORCE_SUPPLY_PSI,
    ):
        if tick_rate_hz <= 0:
            raise ValueError("tick_rate_hz must be positive")
        self.tables = tables
        self.tick_rate_hz = float(tick_rate_hz)
        self.tick_ms = 1000.0 / tick_rate_hz
        self.force_supply_psi = float(force_supply_psi)
        self.exhaust_ticks = max(1, math.ceil(tables.exhaust_nominal_ms / self.tick_ms))
        self._plan_cache: dict[float, int] = {}

    def initial_state(self) -> ControllerState:
        return ControllerState()

    def validate_command(self, command: HapticCommand) -> None:
        if not (0.0 <= command.target_force_N <= MAX_COMMAND_FORCE_N):
            raise OutOfRangeError(
                f"force target {command.target_force_N} N outside [0, {MAX_COMMAND_FORCE_N}]"
            )
        f = command.vib_frequency_Hz
        if f != 0.0 and not (VIBRATION_MIN_HZ <= f <= VIBRATION_MAX_HZ):
            raise OutOfRangeError(
                f"vibration frequency {f} Hz outside {{0}} u [{VIBRATION_MIN_HZ}, {VIBRATION_MAX_HZ}]"
            )
        if f > self.tick_rate_hz / 2.0:
            raise OutOfRangeError(
                f"vibration frequency {f} Hz needs a tick rate of at least {2 * f:g} Hz"
            )
        if not (0.0 <= command.vib_supply_psi <= 10.0):
            raise OutOfRangeError(
                f"vibration supply {command.vib_supply_psi} psi outside [0, 10]"
            )
        if command.thermal_target_C is not None:
            plan_thermal(self.tables, command.thermal_target_C)  # raises if infeasible

    def _plan_ticks(self, target_force_N: float) -> int:
        cached = self._plan_cache.get(target_force_N)
        if cached is None:
            if len(self._plan_cache) > 8192:
                self._plan_cache.clear()
            cached = plan_inflation_ticks(
                self.tables, target_force_N, self.force_supply_psi, self.tick_rate_hz
            )
            self._plan_cache[target_force_N] = cached
        return cached

    def tick(self, state: ControllerState, command: HapticCommand) -> TickOutput:
        """Advance one tick. Mutates and returns the given state (single writer)."""
        if command is not state.command and command != state.command:
            self.validate_command(command)
        state.command = command

        # --- lower chamber (quasi-static pressure) ---
        pv_l = nv_l = False
        if state.lower_phase == "exhaust":
            if state.exhaust_remaining > 0:
                nv_l = True
                state.exhaust_remaining -= 1
            if state.exhaust_remaining == 0:
                state.lower_phase = "idle"
                state.charged_ticks = 0
        else:
            plan = self._plan_ticks(command.target_force_N)
            if plan > state.charged_ticks:
                pv_l = True
                state.charged_ticks += 1
                state.lower_phase = "inflate"
            elif plan < state.charged_ticks:
                nv_l = True
                state.lower_phase = "exhaust"
                state.exhaust_remaining = self.exhaust_ticks - 1
                if state.exhaust_remaining == 0:
                    state.lower_phase = "idle"
                    state.charged_ticks = 0
            else:
                state.lower_phase = "seal" if state.charged_ticks > 0 else "idle"

        # --- upper chamber (vibration cycling) ---
        pv_u = nv_u = False
        f = command.vib_frequency_Hz
        if f <= 0.0:
            state.vib_active_hz = 0.0
            state.vib_cycle_len = 0
        else:
            if f != state.vib_active_hz:
                state.vib_active_hz = f
                state.vib_frac = 0.0
                state.vib_cycle_len = 0
            if state.vib_cycle_len == 0 or state.vib_cycle_pos >= state.vib_cycle_len:
                ideal = self.tick_rate_hz / f
                total = state.vib_frac + ideal
                state.vib_cycle_len = int(total)
                state.vib_frac = total - state.vib_cycle_len
                state.vib_inflate_len = state.vib_cycle_len // 2
                state.vib_cycle_pos = 0
            if state.vib_cycle_pos < state.vib_inflate_len:
                pv_u = True
            else:
                nv_u = True
            state.vib_cycle_pos += 1

        # --- safety interlock (would-be continuous open times) ---
        violation = None
        pv_l_ms = state.pv_lower_open_ms + self.tick_ms if pv_l else 0.0
        pv_u_ms = state.pv_upper_open_ms + self.tick_ms if pv_u else 0.0
        if pv_l and self.force_supply_psi >= SAFETY_SUPPLY_PSI and pv_l_ms > MAX_VALVE_OPEN_MS:
            violation = SafetyViolation(
                state.tick_index, "pv_lower", pv_l_ms, self.force_supply_psi
            )
        elif pv_u and command.vib_supply_psi >= SAFETY_SUPPLY_PSI and pv_u_ms > MAX_VALVE_OPEN_MS:
            violation = SafetyViolation(
                state.tick_index, "pv_upper", pv_u_ms, command.vib_supply_psi
            )

        if violation is not None:
            bank = ALL_EXHAUST
            state.violations += 1
            # vent everything and restart both channels from empty
            state.lower_phase = "exhaust"
            state.exhaust_remaining = max(self.exhaust_ticks - 1, 0)
            state.charged_ticks = 0
            state.vib_active_hz = 0.0
            state.vib_cycle_len = 0
            state.pv_lower_open_ms = 0.0
            state.pv_upper_open_ms = 0.0
        else:
            bank = ValveBank(pv_lower=pv_l, nv_lower=nv_l, pv_upper=pv_u, nv_upper=nv_u)
            state.pv_lower_open_ms = pv_l_ms
            state.pv_upper_open_ms = pv_u_ms

        # --- regulator setpoints ---
        vortex = plan_thermal(self.tables, command.thermal_target_C)
        if bank.pv_lower:
            chamber = self.force_supply_psi
        elif f > 0.0 and violation is None:
            chamber = command.vib_supply_psi
        else:
            chamber = 0.0
        setpoints = RegulatorSetpoints(chamber_supply_psi=chamber, vortex_supply_bar=vortex)

        state.tick_index += 1
        return TickOutput(state=state, bank=bank, setpoints=setpoints, violation=violation)


def safety_check(
    state: ControllerState,
    force_supply_psi: float = DEFAULT_FORCE_SUPPLY_PSI,
    vib_supply_psi: float = DEFAULT_VIB_SUPPLY_PSI,
) -> SafetyViolation | None:
    """Report a violation if any inlet's continuous open time exceeds the limit
    at a supply of 10 psi or more; None when the state is safe."""
    if force_supply_psi >= SAFETY_SUPPLY_PSI and state.pv_lower_open_ms > MAX_VALVE_OPEN_MS:
        return SafetyViolation(
            state.tick_index, "pv_lower", state.pv_lower_open_ms, force_supply_psi
        )
    if vib_supply_psi >= SAFETY_SUPPLY_PSI and state.pv_upper_open_ms > MAX_VALVE_OPEN_MS:
        return SafetyViolation(
            state.tick_index, "pv_upper", state.pv_upper_open_ms, vib_supply_psi
        )
    return None
