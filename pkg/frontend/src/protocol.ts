// Wire types and codecs for the layout stream.
//
// Frames arrive binary by default (magic "IMLG", little-endian) or as JSON
// when the session negotiated `frameFormat: "json"`. Commands and events
// are always JSON text.

export const FRAME_MAGIC = 0x494d4c47; // "IMLG" big-endian read of the 4 bytes
export const FRAME_VERSION = 1;

export interface EdgePolyline {
  id: number;
  points: Float32Array; // 3 * pointCount, xyz interleaved
  rgba: Uint8Array; // 4
  width: number;
}

export interface RingMark {
  community: number;
  center: [number, number, number];
  radius: number;
  rgba: [number, number, number, number];
}

export interface Frame {
  frameId: number;
  nodeIds: Uint32Array;
  nodePos: Float32Array; // 3 * n
  nodeRadius: Float32Array;
  nodeRgba: Uint8Array; // 4 * n
  edges: EdgePolyline[];
  rings: RingMark[];
}

export class FrameFormatError extends Error {}

class Cursor {
  view: DataView;
  offset = 0;

  constructor(buffer: ArrayBuffer) {
    this.view = new DataView(buffer);
  }

  need(bytes: number): void {
    if (this.offset + bytes > this.view.byteLength) {
      throw new FrameFormatError(`truncated frame at byte ${this.view.byteLength}`);
    }
  }

  u8(): number {
    this.need(1);
    return this.view.getUint8(this.offset++);
  }

  u16(): number {
    this.need(2);
    const v = this.view.getUint16(this.offset, true);
    this.offset += 2;
    return v;
  }

  u32(): number {
    this.need(4);
    const v = this.view.getUint32(this.offset, true);
    this.offset += 4;
    return v;
  }

  u64(): number {
    this.need(8);
    const v = this.view.getBigUint64(this.offset, true);
    this.offset += 8;
    return Number(v);
  }

  f32(): number {
    this.need(4);
    const v = this.view.getFloat32(this.offset, true);
    this.offset += 4;
    return v;
  }

  f32Array(count: number): Float32Array {
    this.need(4 * count);
    const out = new Float32Array(count);
    for (let i = 0; i < count; i++) {
      out[i] = this.view.getFloat32(this.offset + 4 * i, true);
    }
    this.offset += 4 * count;
    return out;
  }

  bytes(count: number): Uint8Array {
    this.need(count);
    const out = new Uint8Array(this.view.buffer, this.view.byteOffset + this.offset, count);
    this.offset += count;
    return out.slice();
  }
}

function isBinaryFrame(buffer: ArrayBuffer): boolean {
  if (buffer.byteLength < 4) return false;
  return new DataView(buffer).getUint32(0, false) === FRAME_MAGIC;
}

function decodeBinary(buffer: ArrayBuffer): Frame {
  const cur = new Cursor(buffer);
  cur.u32(); // magic, checked by the caller
  const version = cur.u16();
  if (version !== FRAME_VERSION) {
    throw new FrameFormatError(`unsupported frame version ${version}`);
  }
  const frameId = cur.u64();

  const n = cur.u32();
  const nodeIds = new Uint32Array(n);
  const nodePos = new Float32Array(3 * n);
  const nodeRadius = new Float32Array(n);
  const nodeRgba = new Uint8Array(4 * n);
  for (let i = 0; i < n; i++) {
    nodeIds[i] = cur.u32();
    nodePos.set(cur.f32Array(3), 3 * i);
    nodeRadius[i] = cur.f32();
    nodeRgba.set(cur.bytes(4), 4 * i);
  }

  const m = cur.u32();
  const edges: EdgePolyline[] = [];
  for (let i = 0; i < m; i++) {
    const id = cur.u32();
    const pointCount = cur.u16();
    const rgba = cur.bytes(4);
    const width = cur.f32();
    edges.push({ id, points: cur.f32Array(3 * pointCount), rgba, width });
  }

  const r = cur.u32();
  const rings: RingMark[] = [];
  for (let i = 0; i < r; i++) {
    const community = cur.u32();
    const c = cur.f32Array(3);
    const radius = cur.f32();
    const rgba = cur.bytes(4);
    rings.push({
      community,
      center: [c[0], c[1], c[2]],
      radius,
      rgba: [rgba[0], rgba[1], rgba[2], rgba[3]],
    });
  }

  if (cur.offset !== buffer.byteLength) {
    throw new FrameFormatError(
      `${buffer.byteLength - cur.offset} trailing bytes after frame`,
    );
  }
  return { frameId, nodeIds, nodePos, nodeRadius, nodeRgba, edges, rings };
}

function decodeJson(text: string): Frame {
  let doc: any;
  try {
    doc = JSON.parse(text);
  } catch {
    throw new FrameFormatError('frame is neither binary nor JSON');
  }
  if (typeof doc !== 'object' || doc === null || !('frameId' in doc)) {
    throw new FrameFormatError('JSON frame missing frameId');
  }
  const nodes: any[] = doc.nodes ?? [];
  const n = nodes.length;
  const nodeIds = new Uint32Array(n);
  const nodePos = new Float32Array(3 * n);
  const nodeRadius = new Float32Array(n);
  const nodeRgba = new Uint8Array(4 * n);
  nodes.forEach((node, i) => {
    nodeIds[i] = node.id;
    nodePos.set(node.pos, 3 * i);
    nodeRadius[i] = node.radius;
    nodeRgba.set(node.rgba, 4 * i);
  });
  const edges: EdgePolyline[] = (doc.edges ?? []).map((e: any) => ({
    id: e.id,
    points: new Float32Array(e.points.flat()),
    rgba: new Uint8Array(e.rgba),
    width: e.width,
  }));
  const rings: RingMark[] = (doc.rings ?? []).map((r: any) => ({
    community: r.community,
    center: [r.center[0], r.center[1], r.center[2]],
    radius: r.radius,
    rgba: [r.rgba[0], r.rgba[1], r.rgba[2], r.rgba[3]],
  }));
  return { frameId: doc.frameId, nodeIds, nodePos, nodeRadius, nodeRgba, edges, rings };
}

const textDecoder = new TextDecoder();

/** Decode one frame message, sniffing binary vs JSON by the magic. */
export function decodeFrame(data: ArrayBuffer | string): Frame {
  if (typeof data === 'string') {
    return decodeJson(data);
  }
  if (isBinaryFrame(data)) {
    return decodeBinary(data);
  }
  return decodeJson(textDecoder.decode(data));
}

export function pointCount(edge: EdgePolyline): number {
  return edge.points.length / 3;
}

// ---------------------------------------------------------------------------
// Commands and events

export type Command =
  | { type: 'loadGraph'; name: string }
  | { type: 'expandNetwork' }
  | { type: 'expandCommunity'; target: number }
  | { type: 'projectCommunity'; target: number }
  | { type: 'resetCommunity'; target: number }
  | { type: 'highlightNode'; target: number }
  | { type: 'highlightCommunity'; target: number }
  | { type: 'clearHighlight' }
  | { type: 'setConfig'; config: Record<string, unknown> };

export function encodeCommand(cmd: Command, requestId?: number): string {
  return JSON.stringify(requestId === undefined ? cmd : { ...cmd, requestId });
}

export interface GraphEvent {
  type: 'graph';
  name: string;
  nodes: number;
  edges: number;
  communities: number;
  depth: number;
  topCommunities: number[];
  membership: number[];
  colors: Record<string, [number, number, number, number]>;
  requestId?: number;
}

export interface AckEvent {
  type: 'ack';
  command: string;
  requestId?: number;
}

export interface ErrorEvent {
  type: 'error';
  message: string;
  requestId?: number | null;
}

export interface TelemetryEvent {
  type: 'telemetry';
  csv: string;
  requestId?: number;
}

export type ServerEvent = GraphEvent | AckEvent | ErrorEvent | TelemetryEvent;

const EVENT_TYPES = new Set(['graph', 'ack', 'error', 'telemetry']);

export function decodeEvent(text: string): ServerEvent {
  let doc: any;
  try {
    doc = JSON.parse(text);
  } catch {
    throw new FrameFormatError('event is not JSON');
  }
  if (typeof doc !== 'object' || doc === null || !EVENT_TYPES.has(doc.type)) {
    throw new FrameFormatError(`unknown event ${JSON.stringify(doc?.type)}`);
  }
  return doc as ServerEvent;
}

/** True when a text message is a JSON frame rather than an event. */
export function isJsonFrame(text: string): boolean {
  try {
    const doc = JSON.parse(text);
    return typeof doc === 'object' && doc !== null && 'frameId' in doc;
  } catch {
    return false;
  }
}
