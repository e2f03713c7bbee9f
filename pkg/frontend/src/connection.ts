/**
 * One WebSocket to the control service with request/reply correlation.
 *
 * Works with both the browser WebSocket and the `ws` package: only the
 * onopen/onmessage/onclose properties and send/close are used.
 */

import { ClientRequest, EventMessage, HelloMessage, ServerMessage } from "./protocol.js";

// Handler params stay `any` so both the DOM WebSocket and the `ws`
// package satisfy this structurally under strictFunctionTypes.
export interface SocketLike {
  readyState: number;
  send(data: string): void;
  close(): void;
  onopen: ((...args: any[]) => void) | null;
  onmessage: ((ev: any) => void) | null;
  onclose: ((...args: any[]) => void) | null;
}

const OPEN = 1;
const REQUEST_TIMEOUT_MS = 10_000;

interface Pending {
  resolve: (msg: ServerMessage) => void;
  reject: (err: Error) => void;
  timer: ReturnType<typeof setTimeout>;
}

export class DebuggerClient {
  onEvent: ((event: EventMessage) => void) | null = null;
  onHello: ((hello: HelloMessage) => void) | null = null;
  onClose: (() => void) | null = null;

  private socket: SocketLike;
  private nextReq = 1;
  private pending = new Map<number, Pending>();
  private helloSeen: Promise<HelloMessage>;
  private resolveHello!: (h: HelloMessage) => void;
  private opened: Promise<void>;

  constructor(socket: SocketLike) {
    this.socket = socket;
    this.helloSeen = new Promise((resolve) => {
      this.resolveHello = resolve;
    });
    this.opened = new Promise((resolve) => {
      if (socket.readyState === OPEN) {
        resolve();
      } else {
        socket.onopen = () => resolve();
      }
    });
    socket.onmessage = (ev) => this.route(String(ev.data));
    socket.onclose = () => {
      for (const p of this.pending.values()) {
        clearTimeout(p.timer);
        p.reject(new Error("connection closed"));
      }
      this.pending.clear();
      this.onClose?.();
    };
  }

  /** Resolves once the socket is open and the server said hello. */
  async ready(): Promise<HelloMessage> {
    await this.opened;
    return this.helloSeen;
  }

  request(message: ClientRequest): Promise<ServerMessage> {
    const req = this.nextReq++;
    return new Promise((resolve, reject) => {
      const timer = setTimeout(() => {
        this.pending.delete(req);
        reject(new Error(`request ${req} timed out: ${JSON.stringify(message)}`));
      }, REQUEST_TIMEOUT_MS);
      this.pending.set(req, { resolve, reject, timer });
      this.socket.send(JSON.stringify({ ...message, req }));
    });
  }

  close(): void {
    this.socket.close();
  }

  private route(raw: string): void {
    let msg: ServerMessage;
    try {
      msg = JSON.parse(raw) as ServerMessage;
    } catch {
      return; // not ours to crash the UI over
    }
    if (msg.t === "event") {
      this.onEvent?.(msg);
      return;
    }
    const req = (msg as { req?: number }).req;
    if (msg.t === "hello" && req === undefined) {
      this.resolveHello(msg);
      this.onHello?.(msg);
      return;
    }
    if (req !== undefined) {
      const waiter = this.pending.get(req);
      if (waiter) {
        this.pending.delete(req);
        clearTimeout(waiter.timer);
        waiter.resolve(msg);
      }
    }
  }
}
