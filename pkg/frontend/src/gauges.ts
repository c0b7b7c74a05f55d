/**
 * Gauge formatting: a pure projection of the view state. Command quantities
 * (force, temperature, valves, burst counts) are shown exactly as framed by
 * the server; only connection/staleness annotations are derived locally.
 */

import { ViewState, isStale } from "./viewstate.js";

export interface GaugeView {
  connectionText: string;
  banner: string | null;
  forceN: number | null;
  forceText: string;
  tempC: number | null;
  tempText: string;
  valves: [number, number, number, number] | null;
  valveText: string;
  vibFlash: boolean;
  clamped: boolean;
  burstTotal: number;
  drops: number;
  stale: boolean;
  tick: number | null;
  errors: string[];
}

const VALVE_LABELS = ["PV.lo", "NV.lo", "PV.up", "NV.up"] as const;

export function formatGauges(state: ViewState, nowMs: number): GaugeView {
  const frame = state.latest;
  const stale = isStale(state, nowMs);
  let banner: string | null = null;
  if (state.status === "version_mismatch") {
    banner = `protocol mismatch: server speaks ${state.protocol ?? "?"}`;
  }
  let connectionText: string;
  switch (state.status) {
    case "connected":
      connectionText = `connected (session ${state.sessionId ?? "?"})`;
      break;
    case "retrying":
      connectionText =
        state.retryInMs !== null ? `reconnecting in ${state.retryInMs} ms` : "reconnecting";
      break;
    default:
      connectionText = state.status;
  }
  return {
    connectionText,
    banner,
    forceN: frame ? frame.force_N : null,
    forceText: frame ? `${String(frame.force_N)} N` : "-",
    tempC: frame ? frame.temp_C : null,
    tempText: frame ? `${String(frame.temp_C)} C` : "-",
    valves: frame ? frame.valves : null,
    valveText: frame
      ? frame.valves.map((v, i) => (v ? VALVE_LABELS[i] : "-")).join(" ")
      : "-",
    vibFlash: frame !== null && frame.vib_event > 0,
    clamped: frame !== null && frame.clamped,
    burstTotal: state.burstTotal,
    drops: frame ? frame.drops : 0,
    stale,
    tick: frame ? frame.tick : null,
    errors: state.errors,
  };
}
