"""Haptic rendering: finger motion over virtual surfaces -> per-tick commands.

Three material kinds are rendered:

* stiffness_surface: constant 3 N contact pressure plus k*d stiffness force,
  where d is the surface-normal indentation past the first-contact point,
  with simultaneous cold rendering at the material temperature.
* textured_surface: constant 3 N contact pressure, cold rendering, and one
  short vibration burst per virtual grid line crossed; burst strength is the
  cycle frequency clamp(v / pitch, 1, 200) Hz, so faster strokes cycle
  faster. Bursts arriving before the active cycle finishes queue and
  coalesce into continuous cycling at the crossing rate.
* button: constant 3 N contact pressure and one step pulse (a single
  maximal-amplitude inflate cycle at the peak-response frequency) per
  downward crossing of the click plane, with a hysteresis re-arm margin.

Off every surface the renderer emits the null command (0 N, 0 Hz, ambient).
One renderer instance serves one session; instances are independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .controller import HapticCommand, NULL_COMMAND
from .errors import MalformedTraceError, SceneError

Vec3 = tuple[float, float, float]

CONTACT_PRESSURE_N = 3.0
FORCE_CLAMP_N = 8.0
BURST_MIN_HZ = 1.0
BURST_MAX_HZ = 200.0
# Fig. 9 peak-response frequency; used for the button's maximal-amplitude pulse.
CLICK_PULSE_HZ = 80.0
CLICK_PULSE_SUPPLY_PSI = 10.0
DEFAULT_REARM_MARGIN_MM = 0.5
DEFAULT_VELOCITY_WINDOW = 5

MATERIAL_KINDS = ("stiffness_surface", "textured_surface", "button")


@dataclass(frozen=True)
class SurfaceMaterial:
    kind: str
    temperature_C: float
    stiffness_N_per_mm: float = 0.0
    grid_pitch_mm: float = 0.0
    grating_axis: str = "x"
    burst_supply_psi: float = 5.0
    click_height_mm: float = 0.0
    rearm_margin_mm: float = DEFAULT_REARM_MARGIN_MM


@dataclass(frozen=True)
class Region:
    """Axis-aligned planar patch: lateral origin/extent plus surface height (z)."""

    origin_mm: tuple[float, float]
    extent_mm: tuple[float, float]
    height_mm: float


@dataclass(frozen=True)
class Mesh:
    region: Region
    material: SurfaceMaterial


@dataclass(frozen=True)
class FingerSample:
    t: float
    position: Vec3


@dataclass
class ContactState:
    in_contact: bool = False
    p_initial: Vec3 | None = None
    last_sample: FingerSample | None = None
    velocity_mm_s: float = 0.0


@dataclass(frozen=True)
class RenderTick:
    """Per-tick renderer output: the command plus telemetry annotations.

    burst_hz is the strength (cycle frequency) of bursts triggered this
    tick; 0 when vib_events is 0.
    """

    command: HapticCommand
    vib_events: int = 0
    clamped: bool = False
    burst_hz: float = 0.0


NULL_TICK = RenderTick(command=NULL_COMMAND)


# ---------------------------------------------------------------------------
# Geometry


def is_touched(position: Vec3, mesh: Mesh) -> bool:
    """True iff the point is inside the region's lateral extent and at or
    below the surface height (closed boundary)."""
    x, y, z = position
    (ox, oy) = mesh.region.origin_mm
    (ex, ey) = mesh.region.extent_mm
    return ox <= x <= ox + ex and oy <= y <= oy + ey and z <= mesh.region.height_mm


def crossings(p_prev: Vec3, p_curr: Vec3, pitch_mm: float, axis: str = "x") -> int:
    """Number of grid lines (planes at multiples of pitch along the stroke
    axis) crossed by the segment. Half-open cell convention
    [n*pitch, (n+1)*pitch): landing exactly on a line counts once, for the
    segment that enters it. Direction-agnostic."""
    if pitch_mm <= 0:
        raise SceneError("grid pitch must be positive")
    i = 0 if axis == "x" else 1
    a = math.floor(p_prev[i] / pitch_mm)
    b = math.floor(p_curr[i] / pitch_mm)
    return abs(b - a)


def estimate_velocity(samples: list[FingerSample], window: int = DEFAULT_VELOCITY_WINDOW) -> float:
    """In-plane speed (mm/s) from a backward finite difference over the most
    recent `window` samples."""
    if len(samples) < 2:
        return 0.0
    recent = samples[-window:]
    for a, b in zip(recent, recent[1:]):
        if b.t == a.t:
            raise MalformedTraceError(f"duplicate timestamp {a.t}")
    first, last = recent[0], recent[-1]
    dt = last.t - first.t
    dx = last.position[0] - first.position[0]
    dy = last.position[1] - first.position[1]
    return math.hypot(dx, dy) / dt


# ---------------------------------------------------------------------------
# Renderer


@dataclass
class _BurstEngine:
    """Single active burst cycle plus a coalescing one-slot queue."""

    frequency_hz: float = 0.0
    supply_psi: float = 5.0
    remaining_ticks: int = 0
    queued: tuple[float, float] | None = None  # (frequency, supply)

    def trigger(self, frequency_hz: float, supply_psi: float, tick_rate_hz: float) -> None:
        if self.remaining_ticks > 0:
            self.queued = (frequency_hz, supply_psi)  # coalesce
        else:
            self._start(frequency_hz, supply_psi, tick_rate_hz)

    def _start(self, frequency_hz: float, supply_psi: float, tick_rate_hz: float) -> None:
        self.frequency_hz = frequency_hz
        self.supply_psi = supply_psi
        # stay at or under one controller cycle so a burst is exactly one
        # inflate+exhaust cycle (no spurious second opening)
        self.remaining_ticks = max(2, int(tick_rate_hz // frequency_hz))

    def step(self, tick_rate_hz: float) -> tuple[float, float]:
        """Returns (frequency, supply) to command this tick; (0, supply) when idle."""
        if self.remaining_ticks <= 0 and self.queued is not None:
            freq, supply = self.queued
            self.queued = None
            self._start(freq, supply, tick_rate_hz)
        if self.remaining_ticks > 0:
            self.remaining_ticks -= 1
            return self.frequency_hz, self.supply_psi
        return 0.0, self.supply_psi

    def cancel(self) -> None:
        self.remaining_ticks = 0
        self.queued = None
        self.frequency_hz = 0.0


@dataclass
class _MeshRuntime:
    contact: ContactState = field(default_factory=ContactState)
    window: list[FingerSample] = field(default_factory=list)
    button_armed: bool = True
    prev_position: Vec3 | None = None
    contact_start_tick: int = 0


class SceneRenderer:
    """Per-session renderer for one scene.

    literal_indentation=True switches Algorithm-style raw-distance
    indentation (|P - P_initial|) in place of the default surface-normal
    projection; the raw form registers lateral slide as pressing depth.
    """

    def __init__(
        self,
        meshes: list[Mesh] | tuple[Mesh, ...],
        ambient_C: float,
        tick_rate_hz: float = 1000.0,
        *,
        literal_indentation: bool = False,
        velocity_window: int = DEFAULT_VELOCITY_WINDOW,
    ):
        self.meshes = tuple(meshes)
        self.ambient_C = float(ambient_C)
        self.tick_rate_hz = float(tick_rate_hz)
        self.dt = 1.0 / self.tick_rate_hz
        self.literal_indentation = literal_indentation
        self.velocity_window = velocity_window
        self.burst_cap_hz = min(BURST_MAX_HZ, self.tick_rate_hz / 2.0)
        self._runtime = {id(mesh): _MeshRuntime() for mesh in self.meshes}
        self._burst = _BurstEngine()
        self._active_mesh: Mesh | None = None
        self._tick_count = 0

    def reset(self) -> None:
        self._runtime = {id(mesh): _MeshRuntime() for mesh in self.meshes}
        self._burst = _BurstEngine()
        self._active_mesh = None
        self._tick_count = 0

    def contact_state(self, mesh: Mesh) -> ContactState:
        return self._runtime[id(mesh)].contact

    def tick(self, t: float, position: Vec3 | None) -> RenderTick:
        self._tick_count += 1
        mesh = None
        if position is not None:
            for candidate in self.meshes:
                if is_touched(position, candidate):
                    mesh = candidate
                    break

        if mesh is not self._active_mesh and self._active_mesh is not None:
            self._end_contact(self._active_mesh)
        self._active_mesh = mesh

        if mesh is None or position is None:
            self._burst.cancel()
            return NULL_TICK

        rt = self._runtime[id(mesh)]
        if not rt.contact.in_contact:
            rt.contact.in_contact = True
            rt.contact.p_initial = position
            rt.window.clear()
            rt.prev_position = None
            rt.contact_start_tick = self._tick_count
        # velocity samples use a contact-local timebase built from integer
        # tick offsets, so identical position sequences produce bit-identical
        # estimates no matter which absolute tick contact began on
        sample = FingerSample(
            t=(self._tick_count - rt.contact_start_tick) * self.dt, position=position
        )
        rt.window.append(sample)
        if len(rt.window) > self.velocity_window:
            del rt.window[: len(rt.window) - self.velocity_window]
        rt.contact.last_sample = sample

        kind = mesh.material.kind
        if kind == "stiffness_surface":
            result = self._render_stiffness(rt, sample, mesh)
        elif kind == "textured_surface":
            result = self._render_texture(rt, sample, mesh)
        elif kind == "button":
            result = self._render_button(rt, sample, mesh)
        else:
            raise SceneError(f"unknown material kind {kind!r}")
        rt.prev_position = position
        return result

    # -- material handlers --

    def _render_stiffness(self, rt: _MeshRuntime, sample: FingerSample, mesh: Mesh) -> RenderTick:
        assert rt.contact.p_initial is not None
        p0 = rt.contact.p_initial
        p = sample.position
        if self.literal_indentation:
            d = math.dist(p, p0)
        else:
            d = max(0.0, p0[2] - p[2])  # surface normal is +z
        force = CONTACT_PRESSURE_N + mesh.material.stiffness_N_per_mm * d
        clamped = force > FORCE_CLAMP_N
        if clamped:
            force = FORCE_CLAMP_N
        self._burst.cancel()
        command = HapticCommand(
            target_force_N=force,
            vib_frequency_Hz=0.0,
            thermal_target_C=mesh.material.temperature_C,
        )
        return RenderTick(command=command, clamped=clamped)

    def _render_texture(self, rt: _MeshRuntime, sample: FingerSample, mesh: Mesh) -> RenderTick:
        material = mesh.material
        events = 0
        f_burst = 0.0
        if rt.prev_position is not None:
            events = crossings(
                rt.prev_position, sample.position, material.grid_pitch_mm, material.grating_axis
            )
        if events:
            rt.contact.velocity_mm_s = estimate_velocity(rt.window, self.velocity_window)
            f_burst = rt.contact.velocity_mm_s / material.grid_pitch_mm
            f_burst = min(max(f_burst, BURST_MIN_HZ), self.burst_cap_hz)
            for _ in range(events):
                self._burst.trigger(f_burst, material.burst_supply_psi, self.tick_rate_hz)
        vib_hz, vib_supply = self._burst.step(self.tick_rate_hz)
        command = HapticCommand(
            target_force_N=CONTACT_PRESSURE_N,
            vib_frequency_Hz=vib_hz,
            vib_supply_psi=vib_supply,
            thermal_target_C=material.temperature_C,
        )
        return RenderTick(command=command, vib_events=events, burst_hz=f_burst)

    def _render_button(self, rt: _MeshRuntime, sample: FingerSample, mesh: Mesh) -> RenderTick:
        material = mesh.material
        z = sample.position[2]
        events = 0
        pulse_hz = 0.0
        if rt.button_armed and z <= material.click_height_mm:
            events = 1
            rt.button_armed = False
            pulse_hz = min(CLICK_PULSE_HZ, self.burst_cap_hz)
            self._burst.trigger(pulse_hz, CLICK_PULSE_SUPPLY_PSI, self.tick_rate_hz)
        elif not rt.button_armed and z > material.click_height_mm + material.rearm_margin_mm:
            rt.button_armed = True
        vib_hz, vib_supply = self._burst.step(self.tick_rate_hz)
        command = HapticCommand(
            target_force_N=CONTACT_PRESSURE_N,
            vib_frequency_Hz=vib_hz,
            vib_supply_psi=vib_supply,
            thermal_target_C=material.temperature_C,
        )
        return RenderTick(command=command, vib_events=events, burst_hz=pulse_hz)

    def _end_contact(self, mesh: Mesh) -> None:
        rt = self._runtime[id(mesh)]
        rt.contact = ContactState()
        rt.window.clear()
        rt.prev_position = None
        rt.button_armed = True
