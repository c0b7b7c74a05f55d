"""Live session service: WebSocket wire protocol over FastAPI.

One session per WebSocket connection. Each session runs the tick pipeline
on its own thread at the configured tick rate against a monotonic clock;
incoming finger messages update a latest-position register consumed at the
next tick boundary (messages within one tick coalesce). Telemetry frames
are emitted at a configurable decimation through a bounded queue: when the
queue is full, frames are dropped and counted, never delaying the tick
loop.

Wire protocol (versioned in the hello frame): JSON text frames, each with a
monotonically increasing per-direction sequence number.

    client -> server: finger {t,x,y,z} | select_scene {name} | reset
    server -> client: hello | scene_info | telemetry | error

Out-of-order finger messages (stale seq) are dropped. Malformed messages
produce an error frame; the session continues. Disconnect tears the
session down and discards actuator state.
"""

from __future__ import annotations

import asyncio
import json
import threading
import time
from collections import deque
from dataclasses import dataclass

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse, PlainTextResponse

from .calibration import CalibrationTables, default_calibration
from .pipeline import MAX_TICK_RATE_HZ, MIN_TICK_RATE_HZ, TickPipeline
from .rendering import FingerSample
from .scene import Scene, Trace, bundled_scene_names, load_bundled_scene, trace_to_text
from .telemetry import TelemetryRecord

PROTOCOL_VERSION = "pneusim.wire/1"
DEFAULT_PORT = 8765
PORT_ENV_VAR = "PNEUSIM_PORT"
DEFAULT_DECIMATION = 10
FRAME_QUEUE_CAP = 256
RECORD_CAP = 200_000


@dataclass
class ServiceConfig:
    tables: CalibrationTables
    scenes: dict[str, Scene]
    default_scene: str
    tick_rate_hz: float = 1000.0
    decimation: int = DEFAULT_DECIMATION
    record_session: bool = True

    @staticmethod
    def bundled(
        tick_rate_hz: float = 1000.0,
        decimation: int = DEFAULT_DECIMATION,
        default_scene: str = "frozen_meat",
    ) -> "ServiceConfig":
        tables = default_calibration()
        scenes = {name: load_bundled_scene(name) for name in bundled_scene_names()}
        return ServiceConfig(
            tables=tables,
            scenes=scenes,
            default_scene=default_scene,
            tick_rate_hz=tick_rate_hz,
            decimation=decimation,
        )


def scene_info_payload(scene: Scene) -> dict:
    meshes = []
    for mesh in scene.meshes:
        m = {
            "kind": mesh.material.kind,
            "temperature_C": mesh.material.temperature_C,
        }
        if mesh.material.kind == "stiffness_surface":
            m["stiffness_N_per_mm"] = mesh.material.stiffness_N_per_mm
        elif mesh.material.kind == "textured_surface":
            m["grid_pitch_mm"] = mesh.material.grid_pitch_mm
            m["grating_axis"] = mesh.material.grating_axis
            m["burst_supply_psi"] = mesh.material.burst_supply_psi
        elif mesh.material.kind == "button":
            m["click_height_mm"] = mesh.material.click_height_mm
            m["rearm_margin_mm"] = mesh.material.rearm_margin_mm
        meshes.append(
            {
                "region": {
                    "origin_mm": list(mesh.region.origin_mm),
                    "extent_mm": list(mesh.region.extent_mm),
                    "height_mm": mesh.region.height_mm,
                },
                "material": m,
            }
        )
    return {"name": scene.name, "ambient_C": scene.ambient_C, "meshes": meshes}


class Session:
    """State for one live connection; owns the tick-loop thread."""

    def __init__(self, session_id: str, config: ServiceConfig, scene_name: str,
                 tick_rate_hz: float, decimation: int):
        self.id = session_id
        self.config = config
        self.scene_name = scene_name
        self.tick_rate_hz = tick_rate_hz
        self.decimation = decimation
        self.pipeline = TickPipeline(config.scenes[scene_name], config.tables, tick_rate_hz)

        self._latest: tuple | None = None  # (seq, t, x, y, z)
        self._last_finger_seq = -1
        self._pending_scene: str | None = None
        self._pending_reset = False
        self._stop = threading.Event()
        self._thread: threading.Thread | None = None

        self._out: deque[str] = deque()
        self._out_lock = threading.Lock()
        self._server_seq = 0
        self.drops = 0
        self.stale_finger_drops = 0

        self.position_log: deque = deque(maxlen=RECORD_CAP)  # per-tick consumed positions
        self.telemetry_log: deque[TelemetryRecord] = deque(maxlen=RECORD_CAP)

    # -- framing --

    def next_seq(self) -> int:
        with self._out_lock:
            seq = self._server_seq
            self._server_seq += 1
            return seq

    def enqueue(self, frame: dict, droppable: bool = False) -> None:
        with self._out_lock:
            if droppable and len(self._out) >= FRAME_QUEUE_CAP:
                self.drops += 1
                return
            frame["seq"] = self._server_seq
            self._server_seq += 1
            self._out.append(json.dumps(frame))

    def pop_frame(self) -> str | None:
        with self._out_lock:
            return self._out.popleft() if self._out else None

    # -- client message intake (async side) --

    def handle_message(self, msg: dict) -> None:
        mtype = msg.get("type")
        if mtype == "finger":
            seq = msg.get("seq")
            if not isinstance(seq, int):
                raise ValueError("finger message needs an integer seq")
            if seq <= self._last_finger_seq:
                self.stale_finger_drops += 1
                return
            try:
                t = float(msg["t"])
                x, y, z = float(msg["x"]), float(msg["y"]), float(msg["z"])
            except (KeyError, TypeError, ValueError):
                raise ValueError("finger message needs numeric t, x, y, z") from None
            self._last_finger_seq = seq
            self._latest = (seq, t, x, y, z)
        elif mtype == "select_scene":
            name = msg.get("name")
            if name not in self.config.scenes:
                raise ValueError(f"unknown scene {name!r}")
            self._pending_scene = name
        elif mtype == "reset":
            self._pending_reset = True
        else:
            raise ValueError(f"unknown message type {mtype!r}")

    # -- tick loop (dedicated thread) --

    def start(self) -> None:
        self._thread = threading.Thread(target=self._run, name=f"pneusim-{self.id}", daemon=True)
        self._thread.start()

    def stop(self) -> None:
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=2.0)

    @property
    def running(self) -> bool:
        return self._thread is not None and self._thread.is_alive()

    def _apply_pending(self) -> None:
        if self._pending_scene is not None:
            name = self._pending_scene
            self._pending_scene = None
            self.scene_name = name
            self.pipeline = TickPipeline(
                self.config.scenes[name], self.config.tables, self.tick_rate_hz
            )
            self._latest = None
            self.position_log.clear()
            self.telemetry_log.clear()
            self.enqueue({"type": "scene_info", "scene": scene_info_payload(self.config.scenes[name])})
        if self._pending_reset:
            self._pending_reset = False
            self.pipeline.reset()
            self._latest = None
            self.position_log.clear()
            self.telemetry_log.clear()

    def _run(self) -> None:
        period = 1.0 / self.tick_rate_hz
        next_t = time.monotonic()
        while not self._stop.is_set():
            now = time.monotonic()
            if now < next_t:
                time.sleep(min(next_t - now, period))
                continue
            self._apply_pending()
            latest = self._latest
            position = latest[2:5] if latest is not None else None
            result = self.pipeline.step(position)
            if self.config.record_session:
                self.position_log.append(position)
                self.telemetry_log.append(result.to_record())
            if result.violation is not None:
                self.enqueue(
                    {
                        "type": "error",
                        "code": "safety_violation",
                        "message": result.violation.describe(),
                        "tick": result.violation.tick,
                    }
                )
            if result.tick % self.decimation == 0:
                self.enqueue(
                    {
                        "type": "telemetry",
                        "tick": result.tick,
                        "time_s": result.time_s,
                        "force_N": result.force_N,
                        "temp_C": result.temp_C,
                        "valves": [
                            int(result.bank.pv_lower),
                            int(result.bank.nv_lower),
                            int(result.bank.pv_upper),
                            int(result.bank.nv_upper),
                        ],
                        "vib_event": result.vib_events,
                        "clamped": result.clamped,
                        "drops": self.drops,
                    },
                    droppable=True,
                )
            next_t += period
            if now - next_t > 1.0:  # fell far behind: resync instead of spiraling
                next_t = now

    def positions_as_trace_text(self) -> str:
        """Export the consumed per-tick positions as a trace document.

        Ticks before the first position are skipped; the first recorded
        position maps to trace time zero, so replaying the document puts
        every sample on the tick boundary that consumed it.
        """
        positions = list(self.position_log)
        first = next((i for i, p in enumerate(positions) if p is not None), None)
        samples = []
        if first is not None:
            rate = self.tick_rate_hz
            # the register holds its last value, so every entry past `first` is set
            samples = [
                FingerSample(t=k / rate, position=p)
                for k, p in enumerate(positions[first:])
            ]
        trace = Trace(
            name=f"live-{self.id}",
            sample_rate_hz=self.tick_rate_hz,
            samples=tuple(samples),
        )
        return trace_to_text(trace)


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    if config is None:
        config = ServiceConfig.bundled()
    app = FastAPI(title="pneusim live service")
    app.state.config = config
    app.state.sessions: dict[str, Session] = {}
    app.state.session_counter = 0

    @app.get("/healthz")
    def healthz():
        return {
            "status": "ok",
            "protocol": PROTOCOL_VERSION,
            "scenes": sorted(config.scenes),
            "tick_rate_hz": config.tick_rate_hz,
        }

    @app.get("/scenes")
    def scenes():
        return {"scenes": sorted(config.scenes)}

    @app.get("/sessions/{session_id}/positions")
    def session_positions(session_id: str):
        session = app.state.sessions.get(session_id)
        if session is None:
            return JSONResponse({"error": "no such session"}, status_code=404)
        return PlainTextResponse(session.positions_as_trace_text())

    @app.websocket("/session")
    async def session_endpoint(
        websocket: WebSocket,
        scene: str | None = None,
        tick_rate: float | None = None,
        decimation: int | None = None,
    ):
        await websocket.accept()
        scene_name = scene or config.default_scene
        rate = tick_rate if tick_rate is not None else config.tick_rate_hz
        decim = decimation if decimation is not None else config.decimation
        if scene_name not in config.scenes:
            await websocket.send_text(
                json.dumps({"type": "error", "seq": 0, "code": "bad_config",
                            "message": f"unknown scene {scene_name!r}"})
            )
            await websocket.close(code=4000)
            return
        if not (MIN_TICK_RATE_HZ <= rate <= MAX_TICK_RATE_HZ) or decim < 1:
            await websocket.send_text(
                json.dumps({"type": "error", "seq": 0, "code": "bad_config",
                            "message": "tick_rate outside [100, 2000] or decimation < 1"})
            )
            await websocket.close(code=4000)
            return

        app.state.session_counter += 1
        session = Session(
            f"s{app.state.session_counter}", config, scene_name, rate, decim
        )
        app.state.sessions[session.id] = session

        await websocket.send_text(
            json.dumps(
                {
                    "type": "hello",
                    "seq": session.next_seq(),
                    "protocol": PROTOCOL_VERSION,
                    "session_id": session.id,
                    "tick_rate_hz": rate,
                    "decimation": decim,
                }
            )
        )
        await websocket.send_text(
            json.dumps(
                {
                    "type": "scene_info",
                    "seq": session.next_seq(),
                    "scene": scene_info_payload(config.scenes[scene_name]),
                }
            )
        )

        session.start()
        sender = asyncio.create_task(_sender_loop(websocket, session))
        try:
            while True:
                raw = await websocket.receive_text()
                try:
                    msg = json.loads(raw)
                    if not isinstance(msg, dict):
                        raise ValueError("frame must be a JSON object")
                    session.handle_message(msg)
                except (ValueError, TypeError) as exc:
                    session.enqueue(
                        {"type": "error", "code": "bad_message", "message": str(exc)}
                    )
        except WebSocketDisconnect:
            pass
        finally:
            session.stop()
            sender.cancel()
            app.state.sessions.pop(session.id, None)

    return app


async def _sender_loop(websocket: WebSocket, session: Session) -> None:
    try:
        while True:
            frame = session.pop_frame()
            if frame is None:
                await asyncio.sleep(0.002)
                continue
            await websocket.send_text(frame)
    except asyncio.CancelledError:
        pass
    except Exception:
        # socket went away mid-send; the receive loop handles teardown
        pass


def serve(config: ServiceConfig | None = None, host: str = "127.0.0.1", port: int = DEFAULT_PORT):
    import uvicorn

    app = create_app(config)
    uvicorn.run(app, host=host, port=port, log_level="warning")
