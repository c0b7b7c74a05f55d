/**
 * Live-session connection: handshake, frame dispatch into the view state,
 * and auto-retry with exponential backoff. The socket is injected so tests
 * can drive a scripted mock server.
 */

import {
  PROTOCOL_VERSION,
  encodeClientMessage,
  parseServerFrame,
} from "./protocol.js";
import {
  ViewState,
  applyServerFrame,
  initialViewState,
  noteMalformed,
  withStatus,
} from "./viewstate.js";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: (() => void) | null;
  onmessage: ((ev: { data: string }) => void) | null;
  onclose: (() => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export interface ConnectionOptions {
  url: string;
  socketFactory: SocketFactory;
  onChange?: (state: ViewState) => void;
  /** injectable timer, defaults to setTimeout */
  schedule?: (fn: () => void, ms: number) => void;
  backoffBaseMs?: number;
  backoffMaxMs?: number;
}

export class ConsoleConnection {
  state: ViewState = initialViewState();

  private socket: SocketLike | null = null;
  private clientSeq = 0;
  private attempts = 0;
  private stopped = false;
  private readonly opts: Required<Pick<ConnectionOptions, "backoffBaseMs" | "backoffMaxMs">> &
    ConnectionOptions;

  constructor(options: ConnectionOptions) {
    this.opts = { backoffBaseMs: 500, backoffMaxMs: 30000, ...options };
  }

  connect(): void {
    this.stopped = false;
    this.open();
  }

  close(): void {
    this.stopped = true;
    this.socket?.close();
    this.socket = null;
    this.update(withStatus(this.state, "closed"));
  }

  get connected(): boolean {
    return this.state.status === "connected";
  }

  sendFinger(t: number, x: number, y: number, z: number): void {
    this.sendMessage({ type: "finger", seq: this.clientSeq++, t, x, y, z });
  }

  selectScene(name: string): void {
    this.sendMessage({ type: "select_scene", seq: this.clientSeq++, name });
  }

  reset(): void {
    this.sendMessage({ type: "reset", seq: this.clientSeq++ });
  }

  private sendMessage(message: Parameters<typeof encodeClientMessage>[0]): void {
    if (this.socket && this.state.status === "connected") {
      this.socket.send(encodeClientMessage(message));
    }
  }

  private open(): void {
    this.update(withStatus(this.state, this.attempts === 0 ? "connecting" : "retrying"));
    const socket = this.opts.socketFactory(this.opts.url);
    this.socket = socket;
    socket.onopen = () => {
      // connected state is declared once the hello frame checks out
    };
    socket.onmessage = (ev) => this.handleFrame(ev.data);
    socket.onclose = () => {
      this.socket = null;
      if (this.stopped || this.state.status === "version_mismatch") {
        return;
      }
      this.scheduleRetry();
    };
  }

  private handleFrame(text: string): void {
    const result = parseServerFrame(text);
    if (!result.ok) {
      // malformed frame: surface a toast, keep the stream alive
      this.update(noteMalformed(this.state, result.reason));
      return;
    }
    const frame = result.frame;
    if (frame.type === "hello") {
      if (frame.protocol !== PROTOCOL_VERSION) {
        // blocking banner; do not retry into an incompatible server
        this.update(
          withStatus(applyServerFrame(this.state, frame, this.now()), "version_mismatch"),
        );
        this.socket?.close();
        return;
      }
      this.attempts = 0;
      this.update(withStatus(applyServerFrame(this.state, frame, this.now()), "connected"));
      return;
    }
    this.update(applyServerFrame(this.state, frame, this.now()));
  }

  private scheduleRetry(): void {
    this.attempts += 1;
    const delay = Math.min(
      this.opts.backoffBaseMs * 2 ** (this.attempts - 1),
      this.opts.backoffMaxMs,
    );
    this.update(withStatus(this.state, "retrying", delay));
    const schedule = this.opts.schedule ?? ((fn, ms) => setTimeout(fn, ms));
    schedule(() => {
      if (!this.stopped) {
        this.open();
      }
    }, delay);
  }

  private now(): number {
    return Date.now();
  }

  private update(next: ViewState): void {
    this.state = next;
    this.opts.onChange?.(next);
  }
}
