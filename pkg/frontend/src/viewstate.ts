/**
 * Pure view-model. Gauge quantities always come verbatim from the most
 * recent telemetry frame (no client-side smoothing of command quantities);
 * frames older than STALE_AFTER_MS are flagged visually.
 */

import type { SceneInfo, ServerFrame, TelemetryFrame } from "./protocol.js";

export const STALE_AFTER_MS = 500;
export const BURST_RING_CAP = 64;
export const ERROR_TOAST_CAP = 8;

export type ConnectionStatus =
  | "idle"
  | "connecting"
  | "connected"
  | "version_mismatch"
  | "retrying"
  | "closed";

export interface BurstEvent {
  tick: number;
  count: number;
}

export interface ViewState {
  status: ConnectionStatus;
  protocol: string | null;
  sessionId: string | null;
  tickRateHz: number | null;
  scene: SceneInfo | null;
  latest: TelemetryFrame | null;
  latestAtMs: number | null;
  burstRing: BurstEvent[];
  burstTotal: number;
  errors: string[];
  retryInMs: number | null;
}

export function initialViewState(): ViewState {
  return {
    status: "idle",
    protocol: null,
    sessionId: null,
    tickRateHz: null,
    scene: null,
    latest: null,
    latestAtMs: null,
    burstRing: [],
    burstTotal: 0,
    errors: [],
    retryInMs: null,
  };
}

function pushError(state: ViewState, message: string): ViewState {
  const errors = [...state.errors, message].slice(-ERROR_TOAST_CAP);
  return { ...state, errors };
}

export function applyServerFrame(state: ViewState, frame: ServerFrame, nowMs: number): ViewState {
  switch (frame.type) {
    case "hello":
      return {
        ...state,
        protocol: frame.protocol,
        sessionId: frame.session_id,
        tickRateHz: frame.tick_rate_hz,
      };
    case "scene_info":
      return { ...state, scene: frame.scene };
    case "telemetry": {
      let ring = state.burstRing;
      let total = state.burstTotal;
      if (frame.vib_event > 0) {
        ring = [...ring, { tick: frame.tick, count: frame.vib_event }].slice(-BURST_RING_CAP);
        total += frame.vib_event;
      }
      return { ...state, latest: frame, latestAtMs: nowMs, burstRing: ring, burstTotal: total };
    }
    case "error":
      return pushError(state, `${frame.code}: ${frame.message}`);
  }
}

export function noteMalformed(state: ViewState, reason: string): ViewState {
  return pushError(state, `malformed frame: ${reason}`);
}

export function withStatus(state: ViewState, status: ConnectionStatus, retryInMs: number | null = null): ViewState {
  return { ...state, status, retryInMs };
}

export function isStale(state: ViewState, nowMs: number): boolean {
  if (state.latestAtMs === null) return false;
  return nowMs - state.latestAtMs > STALE_AFTER_MS;
}
