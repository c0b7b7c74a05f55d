/**
 * Wire protocol types and framing for the live session service.
 *
 * The console is a pure view + input device: it never recomputes forces or
 * crossings, it only displays what the server framed. Parsing therefore
 * validates shape, nothing more.
 */

export const PROTOCOL_VERSION = "pneusim.wire/1";

export interface RegionInfo {
  origin_mm: [number, number];
  extent_mm: [number, number];
  height_mm: number;
}

export interface MaterialInfo {
  kind: string;
  temperature_C: number;
  stiffness_N_per_mm?: number;
  grid_pitch_mm?: number;
  grating_axis?: string;
  burst_supply_psi?: number;
  click_height_mm?: number;
  rearm_margin_mm?: number;
}

export interface MeshInfo {
  region: RegionInfo;
  material: MaterialInfo;
}

export interface SceneInfo {
  name: string;
  ambient_C: number;
  meshes: MeshInfo[];
}

export interface HelloFrame {
  type: "hello";
  seq: number;
  protocol: string;
  session_id: string;
  tick_rate_hz: number;
  decimation: number;
}

export interface SceneInfoFrame {
  type: "scene_info";
  seq: number;
  scene: SceneInfo;
}

export interface TelemetryFrame {
  type: "telemetry";
  seq: number;
  tick: number;
  time_s: number;
  force_N: number;
  temp_C: number;
  valves: [number, number, number, number];
  vib_event: number;
  clamped: boolean;
  drops: number;
}

export interface ErrorFrame {
  type: "error";
  seq: number;
  code: string;
  message: string;
  tick?: number;
}

export type ServerFrame = HelloFrame | SceneInfoFrame | TelemetryFrame | ErrorFrame;

export type ParseResult =
  | { ok: true; frame: ServerFrame }
  | { ok: false; reason: string };

function isNumber(v: unknown): v is number {
  return typeof v === "number" && Number.isFinite(v);
}

export function parseServerFrame(text: string): ParseResult {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch {
    return { ok: false, reason: "frame is not valid JSON" };
  }
  if (typeof raw !== "object" || raw === null || Array.isArray(raw)) {
    return { ok: false, reason: "frame is not an object" };
  }
  const frame = raw as Record<string, unknown>;
  switch (frame.type) {
    case "hello":
      if (typeof frame.protocol !== "string" || typeof frame.session_id !== "string") {
        return { ok: false, reason: "hello frame missing protocol/session_id" };
      }
      return { ok: true, frame: frame as unknown as HelloFrame };
    case "scene_info": {
      const scene = frame.scene as Record<string, unknown> | undefined;
      if (!scene || typeof scene.name !== "string" || !Array.isArray(scene.meshes)) {
        return { ok: false, reason: "scene_info frame missing scene" };
      }
      return { ok: true, frame: frame as unknown as SceneInfoFrame };
    }
    case "telemetry": {
      if (
        !isNumber(frame.tick) ||
        !isNumber(frame.force_N) ||
        !isNumber(frame.temp_C) ||
        !Array.isArray(frame.valves) ||
        frame.valves.length !== 4 ||
        !isNumber(frame.vib_event)
      ) {
        return { ok: false, reason: "telemetry frame missing fields" };
      }
      return { ok: true, frame: frame as unknown as TelemetryFrame };
    }
    case "error":
      if (typeof frame.message !== "string") {
        return { ok: false, reason: "error frame missing message" };
      }
      return { ok: true, frame: frame as unknown as ErrorFrame };
    default:
      return { ok: false, reason: `unknown frame type ${String(frame.type)}` };
  }
}

export interface FingerMessage {
  type: "finger";
  seq: number;
  t: number;
  x: number;
  y: number;
  z: number;
}

export interface SelectSceneMessage {
  type: "select_scene";
  seq: number;
  name: string;
}

export interface ResetMessage {
  type: "reset";
  seq: number;
}

export type ClientMessage = FingerMessage | SelectSceneMessage | ResetMessage;

export function encodeClientMessage(message: ClientMessage): string {
  return JSON.stringify(message);
}
