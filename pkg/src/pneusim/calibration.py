"""Calibration tables: parsing, validation, and thermal trajectory fitting.

The calibration document is a line-oriented text format: top-level
``key value`` pairs followed by ``[section]`` blocks holding two-column
tables. The loader enforces every table invariant and rejects bad documents
with a line-level diagnostic. Cooling dynamics are represented in the file as
raw digitized (time, temperature) trajectories; first-order lag parameters
(steady state and time constant per characterized pressure) are least-squares
fitted at load time and attached to the returned tables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.optimize import curve_fit

from .errors import CalibrationError

SCHEMA_VERSION = 1

VORTEX_MIN_BAR = 3.42
VORTEX_MAX_BAR = 6.00
VIBRATION_MIN_HZ = 1.0
VIBRATION_MAX_HZ = 200.0
PERCEPTION_THRESHOLD_G = 0.003
EXHAUST_RANGE_MS = (30.0, 50.0)
MAX_VALVE_OPEN_MS = 250.0
SAFETY_SUPPLY_PSI = 10.0

Curve = tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class ThermalFit:
    """First-order lag parameters fitted to one digitized cooling trajectory."""

    pressure_bar: float
    steady_C: float
    tau_s: float


@dataclass(frozen=True)
class CalibrationTables:
    schema_version: int
    thermal_ambient_C: float
    thermal_curves: tuple[tuple[float, Curve], ...]
    force_curve: tuple[tuple[float, Curve], ...]
    vibration_response: Curve
    exhaust_decay_ms: tuple[float, float]
    flow_rate_m3ph: tuple[float, float] | None = None
    notes: tuple[str, ...] = ()
    thermal_fits: tuple[ThermalFit, ...] = field(default=())

    @property
    def exhaust_nominal_ms(self) -> float:
        lo, hi = self.exhaust_decay_ms
        return 0.5 * (lo + hi)

    @property
    def force_pressures_psi(self) -> tuple[float, ...]:
        return tuple(p for p, _ in self.force_curve)

    @property
    def thermal_pressures_bar(self) -> tuple[float, ...]:
        return tuple(p for p, _ in self.thermal_curves)


def _relax(t, steady, tau, ambient):
    return steady + (ambient - steady) * np.exp(-t / tau)


def fit_thermal_curves(
    ambient_C: float, curves: tuple[tuple[float, Curve], ...]
) -> tuple[ThermalFit, ...]:
    """Least-squares fit of (steady_C, tau_s) per digitized trajectory."""
    fits = []
    for pressure, samples in curves:
        ts = np.array([t for t, _ in samples])
        temps = np.array([T for _, T in samples])
        popt, _ = curve_fit(
            lambda t, steady, tau: _relax(t, steady, tau, ambient_C),
            ts,
            temps,
            p0=(temps[-1], 1.0),
            bounds=((-50.0, 1e-3), (ambient_C, 60.0)),
            maxfev=10000,
        )
        fits.append(ThermalFit(pressure, float(popt[0]), float(popt[1])))
    return tuple(fits)


# ---------------------------------------------------------------------------
# Parsing


def _parse_float(token: str, line: int, what: str) -> float:
    try:
        value = float(token)
    except ValueError:
        raise CalibrationError(f"{what}: not a number: {token!r}", line=line) from None
    if not math.isfinite(value):
        raise CalibrationError(f"{what}: non-finite value", line=line)
    return value


def parse_calibration(text: str, path: str | None = None) -> CalibrationTables:
    ambient: float | None = None
    schema: int | None = None
    exhaust: tuple[float, float] | None = None
    flow: tuple[float, float] | None = None
    notes: list[str] = []
    thermal: list[tuple[float, list[tuple[float, float]], int]] = []
    force: list[tuple[float, list[tuple[float, float]], int]] = []
    vibration: list[tuple[float, float]] = []
    vibration_line: int | None = None

    section: str | None = None
    rows: list[tuple[float, float]] | None = None

    def fail(msg: str, line: int):
        raise CalibrationError(msg, line=line, path=path)

    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if stripped.startswith("["):
            if not stripped.endswith("]"):
                fail("unterminated section header", lineno)
            header = stripped[1:-1].split()
            if header[0] == "thermal_bar":
                if len(header) != 2:
                    fail("thermal section needs a pressure: [thermal_bar <bar>]", lineno)
                pressure = _parse_float(header[1], lineno, "thermal pressure")
                rows = []
                thermal.append((pressure, rows, lineno))
                section = "thermal"
            elif header[0] == "force_psi":
                if len(header) != 2:
                    fail("force section needs a pressure: [force_psi <psi>]", lineno)
                pressure = _parse_float(header[1], lineno, "force pressure")
                rows = []
                force.append((pressure, rows, lineno))
                section = "force"
            elif header[0] == "vibration_hz_g":
                rows = []
                section = "vibration"
                vibration_line = lineno
            else:
                fail(f"unknown section {header[0]!r}", lineno)
            continue

        parts = stripped.split()
        if section is None:
            key = parts[0]
            if key == "schema_version":
                if len(parts) != 2 or not parts[1].isdigit():
                    fail("schema_version takes one integer", lineno)
                schema = int(parts[1])
                if schema != SCHEMA_VERSION:
                    fail(f"unsupported schema_version {schema} (expected {SCHEMA_VERSION})", lineno)
            elif key == "ambient_C":
                if len(parts) != 2:
                    fail("ambient_C takes one value", lineno)
                ambient = _parse_float(parts[1], lineno, "ambient_C")
            elif key == "exhaust_decay_ms":
                if len(parts) != 3:
                    fail("exhaust_decay_ms takes min and max", lineno)
                lo = _parse_float(parts[1], lineno, "exhaust min")
                hi = _parse_float(parts[2], lineno, "exhaust max")
                exhaust = (lo, hi)
                if not (EXHAUST_RANGE_MS[0] <= lo <= hi <= EXHAUST_RANGE_MS[1]):
                    fail(
                        f"exhaust_decay_ms must satisfy "
                        f"{EXHAUST_RANGE_MS[0]} <= min <= max <= {EXHAUST_RANGE_MS[1]}",
                        lineno,
                    )
            elif key == "flow_rate_m3ph":
                if len(parts) != 3:
                    fail("flow_rate_m3ph takes min and max", lineno)
                flow = (
                    _parse_float(parts[1], lineno, "flow min"),
                    _parse_float(parts[2], lineno, "flow max"),
                )
            elif key == "note":
                notes.append(stripped[len("note") :].strip())
            else:
                fail(f"unknown key {key!r}", lineno)
            continue

        # table row
        if len(parts) != 2:
            fail("table rows have exactly two columns", lineno)
        x = _parse_float(parts[0], lineno, "table x")
        y = _parse_float(parts[1], lineno, "table y")
        assert rows is not None
        rows.append((x, y))
        if section == "thermal":
            _check_thermal_row(thermal[-1], ambient, lineno, path)
        elif section == "force":
            _check_force_row(force[-1], lineno, path)
        elif section == "vibration":
            vibration.append((x, y))
            _check_vibration_row(vibration, lineno, path)

    # document-level checks
    if schema is None:
        raise CalibrationError("missing schema_version", path=path)
    if ambient is None:
        raise CalibrationError("missing ambient_C", path=path)
    if exhaust is None:
        raise CalibrationError("missing exhaust_decay_ms", path=path)
    if not thermal:
        raise CalibrationError("no thermal trajectories", path=path)
    if not force:
        raise CalibrationError("no force series", path=path)
    if not vibration:
        raise CalibrationError("no vibration response table", path=path)

    for pressure, rows_, header_line in thermal:
        if not (VORTEX_MIN_BAR <= pressure <= VORTEX_MAX_BAR):
            fail(
                f"thermal pressure {pressure} bar outside "
                f"[{VORTEX_MIN_BAR}, {VORTEX_MAX_BAR}]",
                header_line,
            )
        if len(rows_) < 2:
            fail("thermal trajectory needs at least two samples", header_line)
        if abs(rows_[0][1] - ambient) > 1e-9:
            fail(f"trajectory must start at ambient ({ambient} C)", header_line + 1)
    for pressure, rows_, header_line in force:
        if len(rows_) < 2:
            fail("force series needs at least two samples", header_line)
        if rows_[0][0] != 0.0 or rows_[0][1] != 0.0:
            fail("force series must start at (0 ms, 0 N)", header_line + 1)
    if vibration_line is not None:
        fmin, fmax = vibration[0][0], vibration[-1][0]
        if fmin > VIBRATION_MIN_HZ or fmax < VIBRATION_MAX_HZ:
            fail(
                f"vibration table must span [{VIBRATION_MIN_HZ}, {VIBRATION_MAX_HZ}] Hz "
                f"(got [{fmin}, {fmax}])",
                vibration_line,
            )

    thermal_sorted = sorted(thermal, key=lambda item: item[0])
    pressures = [p for p, _, _ in thermal_sorted]
    if len(set(pressures)) != len(pressures):
        raise CalibrationError("duplicate thermal pressure sections", path=path)
    force_sorted = sorted(force, key=lambda item: item[0])

    curves = tuple((p, tuple(r)) for p, r, _ in thermal_sorted)
    tables = CalibrationTables(
        schema_version=schema,
        thermal_ambient_C=ambient,
        thermal_curves=curves,
        force_curve=tuple((p, tuple(r)) for p, r, _ in force_sorted),
        vibration_response=tuple(vibration),
        exhaust_decay_ms=exhaust,
        flow_rate_m3ph=flow,
        notes=tuple(notes),
        thermal_fits=fit_thermal_curves(ambient, curves),
    )
    _check_fits(tables, path)
    return tables


def _check_thermal_row(entry, ambient, lineno, path):
    _, rows, _ = entry
    if len(rows) >= 2:
        (t0, temp0), (t1, temp1) = rows[-2], rows[-1]
        if t1 <= t0:
            raise CalibrationError("trajectory times must strictly increase", line=lineno, path=path)
        if temp1 > temp0:
            raise CalibrationError(
                "temperature rises during the cooling phase", line=lineno, path=path
            )


def _check_force_row(entry, lineno, path):
    _, rows, _ = entry
    if len(rows) >= 2:
        (ms0, f0), (ms1, f1) = rows[-2], rows[-1]
        if ms1 <= ms0:
            raise CalibrationError("valve opening durations must strictly increase", line=lineno, path=path)
        if f1 < f0:
            raise CalibrationError(
                "force must be non-decreasing in valve opening duration", line=lineno, path=path
            )
    ms, force_n = rows[-1]
    if ms < 0 or ms > MAX_VALVE_OPEN_MS:
        raise CalibrationError(
            f"valve opening duration {ms} ms outside [0, {MAX_VALVE_OPEN_MS}]",
            line=lineno,
            path=path,
        )
    if force_n < 0:
        raise CalibrationError("negative force", line=lineno, path=path)


def _check_vibration_row(rows, lineno, path):
    if len(rows) >= 2 and rows[-1][0] <= rows[-2][0]:
        raise CalibrationError("vibration frequencies must strictly increase", line=lineno, path=path)
    freq, amp = rows[-1]
    if freq < VIBRATION_MIN_HZ or freq > VIBRATION_MAX_HZ:
        raise CalibrationError(
            f"frequency {freq} Hz outside [{VIBRATION_MIN_HZ}, {VIBRATION_MAX_HZ}]",
            line=lineno,
            path=path,
        )
    if amp <= PERCEPTION_THRESHOLD_G:
        raise CalibrationError(
            f"amplitude {amp} g not above the {PERCEPTION_THRESHOLD_G} g perception threshold",
            line=lineno,
            path=path,
        )


def _check_fits(tables: CalibrationTables, path):
    """Fitted parameters must be monotone in pressure or the pointwise
    trajectory-ordering invariant cannot hold."""
    fits = tables.thermal_fits
    for a, b in zip(fits, fits[1:]):
        if b.steady_C >= a.steady_C:
            raise CalibrationError(
                f"fitted steady state not decreasing in pressure "
                f"({a.pressure_bar} bar -> {a.steady_C:.2f} C, "
                f"{b.pressure_bar} bar -> {b.steady_C:.2f} C)",
                path=path,
            )
        if b.tau_s >= a.tau_s:
            raise CalibrationError(
                f"fitted time constant not decreasing in pressure "
                f"({a.pressure_bar} bar -> {a.tau_s:.2f} s, "
                f"{b.pressure_bar} bar -> {b.tau_s:.2f} s)",
                path=path,
            )


def load_calibration(path: str | Path) -> CalibrationTables:
    path = Path(path)
    return parse_calibration(path.read_text(), path=str(path))


def default_calibration() -> CalibrationTables:
    """The bundled v1 calibration file."""
    text = (
        resources.files("pneusim.data")
        .joinpath("actuator_calibration.cal")
        .read_text()
    )
    return parse_calibration(text, path="actuator_calibration.cal")
