"""Per-tick render -> control -> plant pipeline, and trace replay.

The plant is the software stand-in for the physical actuator: it sees only
valve states and regulator setpoints, exactly like the hardware would, and
produces membrane force and contact temperature. Everything here is
deterministic: no wall clock, no randomness, state advances strictly per
tick.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .actuator import (
    DEFAULT_RECOVERY_FACTOR,
    ForceState,
    ThermalState,
    exhaust_step,
    force_from_inflation,
    thermal_step,
)
from .calibration import MAX_VALVE_OPEN_MS, CalibrationTables
from .controller import (
    HapticCommand,
    RegulatorSetpoints,
    SafetyViolation,
    ValveBank,
    ValveController,
)
from .errors import SafetyViolationError, SceneError
from .rendering import SceneRenderer
from .scene import Scene, Trace, TraceSampler
from .telemetry import ReplaySummary, TelemetryRecord

MIN_TICK_RATE_HZ = 100.0
MAX_TICK_RATE_HZ = 2000.0


@dataclass
class ActuatorState:
    """Simulated plant condition (lower chamber + thermal + charge bookkeeping)."""

    thermal: ThermalState
    force: ForceState
    charge_ms: float = 0.0
    charge_supply_psi: float = 0.0


class ActuatorPlant:
    """Valve-driven actuator model: bank + setpoints in, force/temperature out."""

    def __init__(
        self,
        tables: CalibrationTables,
        tick_rate_hz: float = 1000.0,
        recovery_factor: float = DEFAULT_RECOVERY_FACTOR,
    ):
        self.tables = tables
        self.tick_rate_hz = float(tick_rate_hz)
        self.dt = 1.0 / tick_rate_hz
        self.tick_ms = 1000.0 / tick_rate_hz
        self.recovery_factor = recovery_factor
        self.state = self.initial_state()

    def initial_state(self) -> ActuatorState:
        return ActuatorState(
            thermal=ThermalState(contact_temp_C=self.tables.thermal_ambient_C),
            force=ForceState(),
        )

    def reset(self) -> None:
        self.state = self.initial_state()

    def step(self, bank: ValveBank, setpoints: RegulatorSetpoints) -> ActuatorState:
        s = self.state
        s.thermal = thermal_step(
            ThermalState(s.thermal.contact_temp_C, setpoints.vortex_supply_bar),
            self.tables,
            self.dt,
            self.recovery_factor,
        )
        if bank.pv_lower:
            if s.charge_ms == 0.0:
                s.charge_supply_psi = setpoints.chamber_supply_psi
            s.charge_ms = min(s.charge_ms + self.tick_ms, MAX_VALVE_OPEN_MS)
            s.force = ForceState(
                membrane_force_N=force_from_inflation(
                    self.tables, s.charge_supply_psi, s.charge_ms
                ),
                sealed=False,
            )
        elif bank.nv_lower:
            s.force = exhaust_step(s.force, self.tables, self.dt)
            s.charge_ms = 0.0
        else:
            # all lower valves closed: sealed, force held exactly
            if not s.force.sealed:
                s.force = ForceState(membrane_force_N=s.force.membrane_force_N, sealed=True)
        return s


@dataclass(frozen=True)
class TickResult:
    """One pipeline tick: the command that drove it plus the resulting state."""

    tick: int
    time_s: float
    command: HapticCommand
    bank: ValveBank
    setpoints: RegulatorSetpoints
    force_N: float
    temp_C: float
    vib_events: int
    clamped: bool
    burst_hz: float = 0.0
    violation: SafetyViolation | None = None

    def to_record(self) -> TelemetryRecord:
        return TelemetryRecord(
            tick_index=self.tick,
            time_s=self.time_s,
            pv_lower=self.bank.pv_lower,
            nv_lower=self.bank.nv_lower,
            pv_upper=self.bank.pv_upper,
            nv_upper=self.bank.nv_upper,
            chamber_supply_psi=self.setpoints.chamber_supply_psi,
            vortex_supply_bar=self.setpoints.vortex_supply_bar,
            membrane_force_N=self.force_N,
            contact_temp_C=self.temp_C,
            vib_event=self.vib_events,
            clamped=self.clamped,
        )


class TickPipeline:
    """Renderer -> controller -> plant, one instance per session."""

    def __init__(
        self,
        scene: Scene,
        tables: CalibrationTables,
        tick_rate_hz: float = 1000.0,
        *,
        literal_indentation: bool = False,
        recovery_factor: float = DEFAULT_RECOVERY_FACTOR,
    ):
        if not (MIN_TICK_RATE_HZ <= tick_rate_hz <= MAX_TICK_RATE_HZ):
            raise SceneError(
                f"tick rate {tick_rate_hz} Hz outside [{MIN_TICK_RATE_HZ}, {MAX_TICK_RATE_HZ}]"
            )
        if abs(scene.ambient_C - tables.thermal_ambient_C) > 1e-6:
            raise SceneError(
                f"scene ambient {scene.ambient_C} C inconsistent with calibration "
                f"ambient {tables.thermal_ambient_C} C",
                field="ambient_C",
            )
        self.scene = scene
        self.tables = tables
        self.tick_rate_hz = float(tick_rate_hz)
        self.dt = 1.0 / tick_rate_hz
        self.renderer = SceneRenderer(
            scene.meshes,
            scene.ambient_C,
            tick_rate_hz,
            literal_indentation=literal_indentation,
        )
        self.controller = ValveController(tables, tick_rate_hz)
        self.controller_state = self.controller.initial_state()
        self.plant = ActuatorPlant(tables, tick_rate_hz, recovery_factor)
        self.tick_index = 0

    def reset(self) -> None:
        self.renderer.reset()
        self.controller_state = self.controller.initial_state()
        self.plant.reset()
        self.tick_index = 0

    def step(self, position) -> TickResult:
        k = self.tick_index
        t = k * self.dt
        render = self.renderer.tick(t, position)
        out = self.controller.tick(self.controller_state, render.command)
        self.controller_state = out.state
        plant = self.plant.step(out.bank, out.setpoints)
        self.tick_index += 1
        return TickResult(
            tick=k,
            time_s=t,
            command=render.command,
            bank=out.bank,
            setpoints=out.setpoints,
            force_N=plant.force.membrane_force_N,
            temp_C=plant.thermal.contact_temp_C,
            vib_events=render.vib_events,
            clamped=render.clamped,
            burst_hz=render.burst_hz,
            violation=out.violation,
        )


def replay_ticks(
    trace: Trace,
    scene: Scene,
    tables: CalibrationTables,
    tick_rate_hz: float = 1000.0,
    *,
    literal_indentation: bool = False,
    stop_on_violation: bool = True,
):
    """Deterministic replay: yields one TickResult per tick.

    Finger samples are linearly interpolated to tick boundaries; trace time
    zero maps to tick zero. A safety violation yields the aborted
    (all-exhaust) tick and then raises SafetyViolationError with the tick
    index unless stop_on_violation is False.
    """
    if trace.samples and tick_rate_hz < trace.sample_rate_hz:
        raise SceneError(
            f"tick rate {tick_rate_hz} Hz below trace sample rate {trace.sample_rate_hz} Hz"
        )
    pipeline = TickPipeline(
        scene, tables, tick_rate_hz, literal_indentation=literal_indentation
    )
    if not trace.samples:
        return
    sampler = TraceSampler(trace)
    n_ticks = int(math.floor(trace.samples[-1].t * tick_rate_hz)) + 1
    for k in range(n_ticks):
        result = pipeline.step(sampler.position_at(k / tick_rate_hz))
        yield result
        if result.violation is not None and stop_on_violation:
            raise SafetyViolationError(
                f"safety violation at tick {result.violation.tick}: "
                f"{result.violation.describe()}",
                tick=result.violation.tick,
                valve=result.violation.valve,
            )


def summarize(results) -> tuple[list[TelemetryRecord], ReplaySummary]:
    """Collect records and the end-of-stream summary from TickResults."""
    records = []
    summary = ReplaySummary()
    min_temp = None
    max_force = 0.0
    for r in results:
        records.append(r.to_record())
        summary.ticks += 1
        summary.bursts += r.vib_events
        summary.clamps += int(r.clamped)
        min_temp = r.temp_C if min_temp is None else min(min_temp, r.temp_C)
        max_force = max(max_force, r.force_N)
    summary.min_temp_C = min_temp if min_temp is not None else 0.0
    summary.max_force_N = max_force
    return records, summary


def replay(
    trace: Trace,
    scene: Scene,
    tables: CalibrationTables,
    tick_rate_hz: float = 1000.0,
    **kwargs,
) -> tuple[list[TelemetryRecord], ReplaySummary]:
    """Replay a trace and return (records, summary). See replay_ticks."""
    return summarize(replay_ticks(trace, scene, tables, tick_rate_hz, **kwargs))
