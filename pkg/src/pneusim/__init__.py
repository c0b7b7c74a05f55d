"""Deterministic hardware-in-the-loop simulator for a multi-mode pneumatic
fingertip haptic actuator (pressure, vibration, cold thermal)."""

from .actuator import (
    ForceState,
    ThermalState,
    exhaust_step,
    force_from_inflation,
    thermal_steady_state,
    thermal_step,
    vibration_amplitude,
)
from .calibration import CalibrationTables, default_calibration, load_calibration
from .controller import (
    HapticCommand,
    RegulatorSetpoints,
    ValveBank,
    ValveController,
    plan_inflation,
    plan_thermal,
    safety_check,
)
from .errors import (
    CalibrationError,
    InfeasibleTargetError,
    MalformedTraceError,
    OutOfRangeError,
    PneusimError,
    SafetyViolationError,
    SceneError,
    TraceError,
)
from .pipeline import ActuatorPlant, TickPipeline, replay, replay_ticks
from .rendering import (
    ContactState,
    FingerSample,
    Mesh,
    SceneRenderer,
    SurfaceMaterial,
    crossings,
    estimate_velocity,
    is_touched,
)
from .scene import Scene, Trace, load_bundled_scene, load_bundled_trace, load_scene, load_trace

__version__ = "0.1.0"

__all__ = [
    "ActuatorPlant",
    "CalibrationError",
    "CalibrationTables",
    "ContactState",
    "FingerSample",
    "ForceState",
    "HapticCommand",
    "InfeasibleTargetError",
    "MalformedTraceError",
    "Mesh",
    "OutOfRangeError",
    "PneusimError",
    "RegulatorSetpoints",
    "SafetyViolationError",
    "Scene",
    "SceneError",
    "SceneRenderer",
    "SurfaceMaterial",
    "ThermalState",
    "TickPipeline",
    "Trace",
    "TraceError",
    "ValveBank",
    "ValveController",
    "crossings",
    "default_calibration",
    "estimate_velocity",
    "exhaust_step",
    "force_from_inflation",
    "is_touched",
    "load_bundled_scene",
    "load_bundled_trace",
    "load_calibration",
    "load_scene",
    "load_trace",
    "plan_inflation",
    "plan_thermal",
    "replay",
    "replay_ticks",
    "safety_check",
    "thermal_steady_state",
    "thermal_step",
    "vibration_amplitude",
]
