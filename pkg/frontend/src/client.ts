// Service access: plain fetch wrappers plus a reconnecting event stream.
// Both take their transports as parameters so tests can run under node.

import type {
  CapturePayload,
  CaptureResponse,
  LabelRecord,
  SessionEvent,
  StateSnapshot,
} from "./protocol.js";

export class ServiceError extends Error {
  constructor(
    message: string,
    public status: number,
  ) {
    super(message);
  }
}

type FetchLike = typeof fetch;

export class ServiceClient {
  constructor(
    public baseUrl: string,
    private fetchImpl: FetchLike = fetch,
  ) {}

  private async call<T>(method: string, path: string, body?: unknown): Promise<T> {
    const resp = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers: body === undefined ? undefined : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const text = await resp.text();
    if (!resp.ok) {
      let detail = text;
      try {
        detail = JSON.parse(text).detail ?? text;
      } catch {
        // leave raw body as the message
      }
      throw new ServiceError(String(detail), resp.status);
    }
    return JSON.parse(text) as T;
  }

  getState(): Promise<StateSnapshot> {
    return this.call("GET", "/state");
  }

  setMode(mode: string): Promise<{ mode: string }> {
    return this.call("POST", "/mode", { mode });
  }

  addLabel(name: string, location: [number, number, number]): Promise<LabelRecord> {
    return this.call("POST", "/labels", { name, location });
  }

  capture(payload: CapturePayload): Promise<CaptureResponse> {
    return this.call("POST", "/capture", payload);
  }
}

// minimal structural view of a websocket so browser and `ws` both fit
export interface WsLike {
  onopen: ((ev?: unknown) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  close(): void;
}

export type WsFactory = (url: string) => WsLike;

export interface EventStreamHooks {
  onEvent(event: SessionEvent): void;
  onConnect(): void; // fires on every (re)connect: caller must resync
  onDisconnect(): void;
}

export class EventStream {
  private ws: WsLike | null = null;
  private closed = false;
  private retryMs = 250;

  constructor(
    private url: string,
    private makeWs: WsFactory,
    private hooks: EventStreamHooks,
  ) {}

  start(): void {
    this.closed = false;
    this.connect();
  }

  stop(): void {
    this.closed = true;
    if (this.ws) this.ws.close();
    this.ws = null;
  }

  private connect(): void {
    if (this.closed) return;
    const ws = this.makeWs(this.url);
    this.ws = ws;
    ws.onopen = () => {
      this.retryMs = 250;
      this.hooks.onConnect();
    };
    ws.onmessage = (ev) => {
      let parsed: unknown;
      try {
        parsed = JSON.parse(String(ev.data));
      } catch {
        return; // not ours to crash on
      }
      const event = parsed as SessionEvent;
      if (event && typeof event.kind === "string") {
        if (event.kind === "hello") return; // server greeting, not a session event
        this.hooks.onEvent(event);
      }
    };
    ws.onerror = () => {
      // onclose follows and owns the retry
    };
    ws.onclose = () => {
      this.ws = null;
      this.hooks.onDisconnect();
      if (!this.closed) {
        const delay = this.retryMs;
        this.retryMs = Math.min(this.retryMs * 2, 4000);
        setTimeout(() => this.connect(), delay);
      }
    };
  }
}
