// WebSocket client for the engine. The socket constructor is injectable so
// the same code runs in the browser and under node (tests pass the `ws`
// package). Incoming traffic is split three ways: binary data and JSON
// documents with a frameId are frames, everything else is an event.

import {
  Command,
  Frame,
  ServerEvent,
  decodeEvent,
  decodeFrame,
  encodeCommand,
  isJsonFrame,
} from './protocol';

interface SocketLike {
  binaryType: string;
  onopen: ((ev: unknown) => void) | null;
  onclose: ((ev: unknown) => void) | null;
  onerror: ((ev: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  send(data: string): void;
  close(): void;
}

export interface SocketCtor {
  new (url: string): SocketLike;
}

export interface ClientOptions {
  WebSocketImpl?: SocketCtor;
}

export type ClientState = 'connecting' | 'open' | 'closed';

interface Pending {
  resolve: (ev: ServerEvent) => void;
  reject: (err: Error) => void;
}

export class EngineClient {
  state: ClientState = 'connecting';
  onFrame: ((frame: Frame) => void) | null = null;
  onEvent: ((ev: ServerEvent) => void) | null = null;
  onStateChange: ((state: ClientState) => void) | null = null;

  private socket: SocketLike | null = null;
  private readonly impl: SocketCtor;
  private nextRequestId = 1;
  private pending = new Map<number, Pending>();

  constructor(readonly url: string, opts: ClientOptions = {}) {
    const impl =
      opts.WebSocketImpl ??
      (typeof WebSocket !== 'undefined' ? (WebSocket as unknown as SocketCtor) : null);
    if (!impl) throw new Error('no WebSocket implementation available');
    this.impl = impl;
  }

  connect(): Promise<void> {
    return new Promise((resolve, reject) => {
      const sock = new this.impl(this.url);
      sock.binaryType = 'arraybuffer';
      sock.onopen = () => {
        this.setState('open');
        resolve();
      };
      sock.onerror = () => {
        if (this.state === 'connecting') reject(new Error(`cannot reach ${this.url}`));
      };
      sock.onclose = () => {
        this.setState('closed');
        for (const p of this.pending.values()) p.reject(new Error('connection closed'));
        this.pending.clear();
      };
      sock.onmessage = (ev) => this.dispatch(ev.data);
      this.socket = sock;
    });
  }

  close(): void {
    this.socket?.close();
  }

  sendCommand(cmd: Command, requestId?: number): void {
    if (!this.socket || this.state !== 'open') throw new Error('not connected');
    this.socket.send(encodeCommand(cmd, requestId));
  }

  /** Send a command and wait for its ack; rejects on an error event. */
  request(cmd: Command): Promise<ServerEvent> {
    const id = this.nextRequestId++;
    return new Promise((resolve, reject) => {
      this.pending.set(id, { resolve, reject });
      try {
        this.sendCommand(cmd, id);
      } catch (err) {
        this.pending.delete(id);
        reject(err as Error);
      }
    });
  }

  private dispatch(data: unknown): void {
    if (data instanceof ArrayBuffer) {
      this.onFrame?.(decodeFrame(data));
      return;
    }
    const text = typeof data === 'string' ? data : String(data);
    if (isJsonFrame(text)) {
      this.onFrame?.(decodeFrame(text));
      return;
    }
    const ev = decodeEvent(text);
    const reqId = (ev as { requestId?: number }).requestId;
    if (reqId !== undefined && reqId !== null && this.pending.has(reqId)) {
      const p = this.pending.get(reqId)!;
      this.pending.delete(reqId);
      if (ev.type === 'error') p.reject(new Error(ev.message));
      else p.resolve(ev);
    }
    this.onEvent?.(ev);
  }

  private setState(state: ClientState): void {
    this.state = state;
    this.onStateChange?.(state);
  }
}
