"""On-disk formats for scenes and finger traces.

Scene documents are JSON with a schema_version field; validation failures
carry the offending field path. Trace documents are line-delimited text: a
self-describing comment header (name, sample_rate_hz, unit) followed by one
``t x y z`` record per line; failures carry the line number.
"""

from __future__ import annotations

import json
import math
import statistics
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import SceneError, TraceError
from .rendering import (
    MATERIAL_KINDS,
    FingerSample,
    Mesh,
    Region,
    SurfaceMaterial,
)

SCENE_SCHEMA_VERSION = 1
TRACE_MAGIC = "# pneusim-trace v1"

# nominal external-tracker rate used for the bundled synthetic traces
DEFAULT_TRACE_RATE_HZ = 120.0

COLD_FLOOR_C = 13.0


@dataclass(frozen=True)
class Scene:
    name: str
    ambient_C: float
    meshes: tuple[Mesh, ...]


@dataclass(frozen=True)
class Trace:
    name: str
    sample_rate_hz: float
    samples: tuple[FingerSample, ...]
    unit: str = "mm"


# ---------------------------------------------------------------------------
# Scene documents


def _expect(mapping, key, types, path):
    if key not in mapping:
        raise SceneError("missing required field", field=f"{path}.{key}" if path else key)
    value = mapping[key]
    if not isinstance(value, types):
        tn = types.__name__ if isinstance(types, type) else "/".join(t.__name__ for t in types)
        raise SceneError(
            f"expected {tn}, got {type(value).__name__}",
            field=f"{path}.{key}" if path else key,
        )
    return value


def _number(mapping, key, path, minimum=None, maximum=None, exclusive_min=None):
    value = _expect(mapping, key, (int, float), path)
    value = float(value)
    where = f"{path}.{key}" if path else key
    if not math.isfinite(value):
        raise SceneError("must be finite", field=where)
    if exclusive_min is not None and value <= exclusive_min:
        raise SceneError(f"must be > {exclusive_min}", field=where)
    if minimum is not None and value < minimum:
        raise SceneError(f"must be >= {minimum}", field=where)
    if maximum is not None and value > maximum:
        raise SceneError(f"must be <= {maximum}", field=where)
    return value


def _vec2(mapping, key, path):
    value = _expect(mapping, key, list, path)
    where = f"{path}.{key}" if path else key
    if len(value) != 2 or not all(isinstance(v, (int, float)) for v in value):
        raise SceneError("expected [x, y] numbers", field=where)
    if not all(math.isfinite(float(v)) for v in value):
        raise SceneError("must be finite", field=where)
    return (float(value[0]), float(value[1]))


def parse_scene(doc: dict | str) -> Scene:
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise SceneError(f"not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise SceneError("document root must be an object")
    version = _expect(doc, "schema_version", int, "")
    if version != SCENE_SCHEMA_VERSION:
        raise SceneError(
            f"unsupported schema_version {version} (expected {SCENE_SCHEMA_VERSION})",
            field="schema_version",
        )
    name = _expect(doc, "name", str, "")
    ambient = _number(doc, "ambient_C", "")
    meshes_doc = _expect(doc, "meshes", list, "")
    meshes = []
    for i, mesh_doc in enumerate(meshes_doc):
        path = f"meshes[{i}]"
        if not isinstance(mesh_doc, dict):
            raise SceneError("expected object", field=path)
        region_doc = _expect(mesh_doc, "region", dict, path)
        rpath = f"{path}.region"
        origin = _vec2(region_doc, "origin_mm", rpath)
        extent = _vec2(region_doc, "extent_mm", rpath)
        if extent[0] <= 0 or extent[1] <= 0:
            raise SceneError("extents must be positive", field=f"{rpath}.extent_mm")
        height = _number(region_doc, "height_mm", rpath)
        material_doc = _expect(mesh_doc, "material", dict, path)
        mpath = f"{path}.material"
        kind = _expect(material_doc, "kind", str, mpath)
        if kind not in MATERIAL_KINDS:
            raise SceneError(
                f"unknown kind {kind!r} (expected one of {MATERIAL_KINDS})",
                field=f"{mpath}.kind",
            )
        temperature = _number(
            material_doc, "temperature_C", mpath, minimum=COLD_FLOOR_C, maximum=ambient
        )
        material_kwargs = {"kind": kind, "temperature_C": temperature}
        if kind == "stiffness_surface":
            material_kwargs["stiffness_N_per_mm"] = _number(
                material_doc, "stiffness_N_per_mm", mpath, minimum=0.0
            )
        elif kind == "textured_surface":
            material_kwargs["grid_pitch_mm"] = _number(
                material_doc, "grid_pitch_mm", mpath, exclusive_min=0.0
            )
            if "grating_axis" in material_doc:
                axis = _expect(material_doc, "grating_axis", str, mpath)
                if axis not in ("x", "y"):
                    raise SceneError("must be 'x' or 'y'", field=f"{mpath}.grating_axis")
                material_kwargs["grating_axis"] = axis
            if "burst_supply_psi" in material_doc:
                material_kwargs["burst_supply_psi"] = _number(
                    material_doc, "burst_supply_psi", mpath, minimum=0.0, maximum=10.0
                )
        elif kind == "button":
            material_kwargs["click_height_mm"] = _number(material_doc, "click_height_mm", mpath)
            if material_kwargs["click_height_mm"] >= height:
                raise SceneError(
                    "click plane must lie below the surface height",
                    field=f"{mpath}.click_height_mm",
                )
            if "rearm_margin_mm" in material_doc:
                material_kwargs["rearm_margin_mm"] = _number(
                    material_doc, "rearm_margin_mm", mpath, exclusive_min=0.0
                )
        meshes.append(
            Mesh(
                region=Region(origin_mm=origin, extent_mm=extent, height_mm=height),
                material=SurfaceMaterial(**material_kwargs),
            )
        )

    _check_overlaps(meshes)
    return Scene(name=name, ambient_C=ambient, meshes=tuple(meshes))


def _check_overlaps(meshes: list[Mesh]) -> None:
    for i in range(len(meshes)):
        for j in range(i + 1, len(meshes)):
            a, b = meshes[i].region, meshes[j].region
            ax0, ay0 = a.origin_mm
            ax1, ay1 = ax0 + a.extent_mm[0], ay0 + a.extent_mm[1]
            bx0, by0 = b.origin_mm
            bx1, by1 = bx0 + b.extent_mm[0], by0 + b.extent_mm[1]
            if ax0 < bx1 and bx0 < ax1 and ay0 < by1 and by0 < ay1:
                raise SceneError(
                    f"regions overlap (meshes[{i}] and meshes[{j}])",
                    field=f"meshes[{j}].region",
                )


def scene_to_doc(scene: Scene) -> dict:
    meshes = []
    for mesh in scene.meshes:
        material: dict = {
            "kind": mesh.material.kind,
            "temperature_C": mesh.material.temperature_C,
        }
        if mesh.material.kind == "stiffness_surface":
            material["stiffness_N_per_mm"] = mesh.material.stiffness_N_per_mm
        elif mesh.material.kind == "textured_surface":
            material["grid_pitch_mm"] = mesh.material.grid_pitch_mm
            material["grating_axis"] = mesh.material.grating_axis
            material["burst_supply_psi"] = mesh.material.burst_supply_psi
        elif mesh.material.kind == "button":
            material["click_height_mm"] = mesh.material.click_height_mm
            material["rearm_margin_mm"] = mesh.material.rearm_margin_mm
        meshes.append(
            {
                "region": {
                    "origin_mm": list(mesh.region.origin_mm),
                    "extent_mm": list(mesh.region.extent_mm),
                    "height_mm": mesh.region.height_mm,
                },
                "material": material,
            }
        )
    return {
        "schema_version": SCENE_SCHEMA_VERSION,
        "name": scene.name,
        "ambient_C": scene.ambient_C,
        "meshes": meshes,
    }


def load_scene(path: str | Path) -> Scene:
    return parse_scene(Path(path).read_text())


def save_scene(scene: Scene, path: str | Path) -> None:
    Path(path).write_text(json.dumps(scene_to_doc(scene), indent=2) + "\n")


# ---------------------------------------------------------------------------
# Trace documents


def parse_trace(text: str) -> Trace:
    name = None
    rate = None
    unit = "mm"
    samples: list[FingerSample] = []
    saw_magic = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            if stripped == TRACE_MAGIC:
                saw_magic = True
                continue
            body = stripped.lstrip("#").strip()
            if ":" in body:
                key, _, value = body.partition(":")
                key = key.strip()
                value = value.strip()
                if key == "name":
                    name = value
                elif key == "sample_rate_hz":
                    try:
                        rate = float(value)
                    except ValueError:
                        raise TraceError("sample_rate_hz is not a number", line=lineno) from None
                elif key == "unit":
                    unit = value
            continue
        parts = stripped.split()
        if len(parts) != 4:
            raise TraceError("records are 't x y z'", line=lineno)
        try:
            t, x, y, z = (float(p) for p in parts)
        except ValueError:
            raise TraceError("non-numeric record field", line=lineno) from None
        if not all(math.isfinite(v) for v in (t, x, y, z)):
            raise TraceError("non-finite record field", line=lineno)
        if samples and t <= samples[-1].t:
            raise TraceError(
                f"timestamps must strictly increase (got {t} after {samples[-1].t})",
                line=lineno,
            )
        if t < 0:
            raise TraceError("negative timestamp", line=lineno)
        samples.append(FingerSample(t=t, position=(x, y, z)))
    if not saw_magic:
        raise TraceError(f"missing header line {TRACE_MAGIC!r}", line=1)
    if name is None:
        raise TraceError("missing '# name:' header", line=1)
    if rate is None:
        raise TraceError("missing '# sample_rate_hz:' header", line=1)
    if unit != "mm":
        raise TraceError(f"unsupported unit {unit!r} (only mm)", line=1)
    trace = Trace(name=name, sample_rate_hz=rate, samples=tuple(samples))
    _check_rate(trace)
    return trace


def _check_rate(trace: Trace) -> None:
    if len(trace.samples) < 2:
        return
    intervals = [b.t - a.t for a, b in zip(trace.samples, trace.samples[1:])]
    median = statistics.median(intervals)
    declared = 1.0 / trace.sample_rate_hz
    if abs(median - declared) > 0.01 * declared:
        raise TraceError(
            f"declared sample rate {trace.sample_rate_hz} Hz is off by more than 1% "
            f"from the median interval {median:.6f} s"
        )


def trace_to_text(trace: Trace) -> str:
    lines = [
        TRACE_MAGIC,
        f"# name: {trace.name}",
        f"# sample_rate_hz: {trace.sample_rate_hz!r}",
        f"# unit: {trace.unit}",
    ]
    for s in trace.samples:
        x, y, z = s.position
        lines.append(f"{s.t!r} {x!r} {y!r} {z!r}")
    return "\n".join(lines) + "\n"


def load_trace(path: str | Path) -> Trace:
    return parse_trace(Path(path).read_text())


def save_trace(trace: Trace, path: str | Path) -> None:
    Path(path).write_text(trace_to_text(trace))


# ---------------------------------------------------------------------------
# Trace interpolation and bundled assets


class TraceSampler:
    """Sequential linear interpolation of a trace onto tick times.

    Times before the first sample hold the first position; times after the
    last sample hold the last. Interpolated points lie on the segment
    between the bracketing samples.
    """

    def __init__(self, trace: Trace):
        self.samples = trace.samples
        self._i = 0

    def position_at(self, t: float):
        samples = self.samples
        if not samples:
            return None
        while self._i + 1 < len(samples) and samples[self._i + 1].t <= t:
            self._i += 1
        if t <= samples[0].t:
            return samples[0].position
        if self._i + 1 >= len(samples):
            return samples[-1].position
        a, b = samples[self._i], samples[self._i + 1]
        u = (t - a.t) / (b.t - a.t)
        ax, ay, az = a.position
        bx, by, bz = b.position
        return (ax + u * (bx - ax), ay + u * (by - ay), az + u * (bz - az))


def bundled_scene_names() -> list[str]:
    root = resources.files("pneusim.data").joinpath("scenes")
    return sorted(p.name[: -len(".json")] for p in root.iterdir() if p.name.endswith(".json"))


def bundled_trace_names() -> list[str]:
    root = resources.files("pneusim.data").joinpath("traces")
    return sorted(p.name[: -len(".trace")] for p in root.iterdir() if p.name.endswith(".trace"))


def load_bundled_scene(name: str) -> Scene:
    text = resources.files("pneusim.data").joinpath(f"scenes/{name}.json").read_text()
    return parse_scene(text)


def load_bundled_trace(name: str) -> Trace:
    text = resources.files("pneusim.data").joinpath(f"traces/{name}.trace").read_text()
    return parse_trace(text)
