"""Exception types shared across the simulator."""

from __future__ import annotations


class PneusimError(Exception):
    """Base class for all simulator errors."""


class OutOfRangeError(PneusimError):
    """Input outside the characterized envelope. Extrapolation is forbidden:
    the physical actuator is only safe inside its measured operating range."""


class InfeasibleTargetError(PneusimError):
    """A commanded target cannot be reached by the hardware."""

    def __init__(self, message: str, max_achievable: float | None = None):
        super().__init__(message)
        self.max_achievable = max_achievable


class SafetyViolationError(PneusimError):
    """Valve duty exceeded the damage limit (inlet open > 250 ms at >= 10 psi)."""

    def __init__(self, message: str, tick: int | None = None, valve: str | None = None):
        super().__init__(message)
        self.tick = tick
        self.valve = valve


class CalibrationError(PneusimError):
    """Calibration document rejected. Carries a line-level diagnostic."""

    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        self.line = line
        self.path = path
        prefix = ""
        if path is not None:
            prefix += f"{path}:"
        if line is not None:
            prefix += f"{line}:"
        super().__init__(f"{prefix} {message}" if prefix else message)


class SceneError(PneusimError):
    """Scene document rejected. Carries the offending field path."""

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


class TraceError(PneusimError):
    """Finger-trace document rejected. Carries a line-level diagnostic."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class MalformedTraceError(TraceError):
    """Trace samples violate the sampling contract (e.g. duplicate timestamps)."""


class ProtocolError(PneusimError):
    """Wire-protocol message rejected."""
