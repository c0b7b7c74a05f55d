/**
 * Browser wiring: canvas scene view, pointer/wheel input, gauge panel.
 * Drag across the regions to stream finger motion; scroll to press.
 */

import { ConsoleConnection, SocketFactory, SocketLike } from "./connection.js";
import { formatGauges } from "./gauges.js";
import {
  DepthControl,
  HOVER_MM,
  MM_PER_NOTCH,
  Viewport,
  fingerZ,
  mmToPx,
  pointerToMm,
  wheelToDepth,
} from "./input.js";
import type { MeshInfo } from "./protocol.js";

const browserSocketFactory: SocketFactory = (url) => {
  const ws = new WebSocket(url);
  const adapter: SocketLike = {
    send: (data) => ws.send(data),
    close: () => ws.close(),
    onopen: null,
    onmessage: null,
    onclose: null,
  };
  ws.onopen = () => adapter.onopen?.();
  ws.onmessage = (ev) => adapter.onmessage?.({ data: String(ev.data) });
  ws.onclose = () => adapter.onclose?.();
  return adapter;
};

function tempColor(tempC: number, ambientC: number): string {
  // ambient renders near-white, the 13 C floor a deep cold blue
  const u = Math.min(Math.max((ambientC - tempC) / (ambientC - 13.0), 0), 1);
  const chill = Math.round(235 - 140 * u);
  return `rgb(${chill}, ${Math.round(240 - 60 * u)}, 255)`;
}

function materialLabel(mesh: MeshInfo): string {
  const m = mesh.material;
  switch (m.kind) {
    case "stiffness_surface":
      return `stiff k=${m.stiffness_N_per_mm ?? "?"} N/mm, ${m.temperature_C} C`;
    case "textured_surface":
      return `grid ${m.grid_pitch_mm ?? "?"} mm, ${m.temperature_C} C`;
    case "button":
      return `button, click at z=${m.click_height_mm ?? "?"} mm`;
    default:
      return m.kind;
  }
}

function start(): void {
  const canvas = document.getElementById("scene") as HTMLCanvasElement;
  const ctx = canvas.getContext("2d")!;
  const gaugeEl = document.getElementById("gauges")!;
  const mappingEl = document.getElementById("mapping")!;
  const params = new URLSearchParams(window.location.search);
  const endpoint =
    params.get("endpoint") ?? `ws://${window.location.hostname}:8765/session`;

  const viewport: Viewport = { originPx: [40, 40], pxPerMm: 6 };
  let depth: DepthControl = { depthMm: 0 };
  let pointerMm: [number, number] | null = null;
  let flashUntil = 0;

  const connection = new ConsoleConnection({
    url: endpoint,
    socketFactory: browserSocketFactory,
  });
  connection.connect();

  canvas.addEventListener("pointermove", (ev) => {
    const rect = canvas.getBoundingClientRect();
    pointerMm = pointerToMm(viewport, ev.clientX - rect.left, ev.clientY - rect.top);
  });
  canvas.addEventListener("pointerleave", () => {
    pointerMm = null;
  });
  canvas.addEventListener(
    "wheel",
    (ev) => {
      ev.preventDefault();
      depth = wheelToDepth(depth, ev.deltaY);
    },
    { passive: false },
  );

  mappingEl.textContent =
    `scroll to press: ${MM_PER_NOTCH} mm per notch ` +
    `(hover ${HOVER_MM} mm above the surface at depth 0)`;

  function draw(): void {
    const state = connection.state;
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    if (state.scene) {
      for (const mesh of state.scene.meshes) {
        const [x0, y0] = mmToPx(viewport, mesh.region.origin_mm[0], mesh.region.origin_mm[1]);
        const w = mesh.region.extent_mm[0] * viewport.pxPerMm;
        const h = mesh.region.extent_mm[1] * viewport.pxPerMm;
        ctx.fillStyle = tempColor(mesh.material.temperature_C, state.scene.ambient_C);
        ctx.fillRect(x0, y0, w, h);
        ctx.strokeStyle = "#456";
        ctx.strokeRect(x0, y0, w, h);
        ctx.fillStyle = "#123";
        ctx.font = "12px sans-serif";
        ctx.fillText(materialLabel(mesh), x0 + 6, y0 + 16);
        if (mesh.material.kind === "textured_surface" && mesh.material.grid_pitch_mm) {
          ctx.strokeStyle = "rgba(60, 90, 140, 0.35)";
          const pitchPx = mesh.material.grid_pitch_mm * viewport.pxPerMm;
          for (let gx = x0; gx <= x0 + w; gx += pitchPx) {
            ctx.beginPath();
            ctx.moveTo(gx, y0);
            ctx.lineTo(gx, y0 + h);
            ctx.stroke();
          }
        }
      }
    }
    if (pointerMm) {
      const [px, py] = mmToPx(viewport, pointerMm[0], pointerMm[1]);
      const pressed = depth.depthMm > HOVER_MM;
      ctx.beginPath();
      ctx.arc(px, py, pressed ? 8 : 5, 0, Math.PI * 2);
      ctx.fillStyle = pressed ? "#d04030" : "#3070d0";
      ctx.fill();
    }
    const view = formatGauges(connection.state, Date.now());
    if (view.vibFlash) {
      flashUntil = performance.now() + 120;
    }
    if (pointerMm && performance.now() < flashUntil) {
      const [px, py] = mmToPx(viewport, pointerMm[0], pointerMm[1]);
      ctx.beginPath();
      ctx.arc(px, py, 14, 0, Math.PI * 2);
      ctx.strokeStyle = "#f0a000";
      ctx.lineWidth = 3;
      ctx.stroke();
      ctx.lineWidth = 1;
    }
    gaugeEl.innerHTML = [
      `<div class="${view.banner ? "banner" : "hidden"}">${view.banner ?? ""}</div>`,
      `<div>link: ${view.connectionText}${view.stale ? ' <b class="stale">STALE</b>' : ""}</div>`,
      `<div>force: <b>${view.forceText}</b>${view.clamped ? " (clamped)" : ""}</div>`,
      `<div>temp: <b>${view.tempText}</b></div>`,
      `<div>valves: ${view.valveText}</div>`,
      `<div>bursts: ${view.burstTotal}  drops: ${view.drops}  tick: ${view.tick ?? "-"}</div>`,
      `<div class="errors">${view.errors.join("<br>")}</div>`,
    ].join("");
  }

  function pump(): void {
    if (connection.connected && pointerMm && connection.state.scene) {
      const z = fingerZ(connection.state.scene, pointerMm[0], pointerMm[1], depth);
      connection.sendFinger(performance.now() / 1000, pointerMm[0], pointerMm[1], z);
    }
    draw();
    requestAnimationFrame(pump);
  }
  requestAnimationFrame(pump);
}

window.addEventListener("DOMContentLoaded", start);
