// End-to-end session against a live engine server: load the medium preset,
// then walk the full interaction sequence (overview, expand network, expand
// community, project community, highlight node). Every command must show up
// on screen within two frames, and the server's telemetry must record the
// same interactions.

import { ChildProcess, spawn } from 'node:child_process';
import { afterAll, beforeAll, describe, expect, it } from 'vitest';
import WebSocket from 'ws';
import { EngineClient } from '../src/client';
import { SocketCtor } from '../src/client';
import { PickIndex } from '../src/picking';
import { Command, Frame, GraphEvent, TelemetryEvent } from '../src/protocol';
import { SceneView } from '../src/scene';

const EYE: [number, number, number] = [0, 1.6, 0];

let server: ChildProcess;
let serverUrl: string;
let stderrLog = '';

beforeAll(async () => {
  server = spawn('python3', ['-m', 'imlgraph.cli', 'serve', '--port', '0'], {
    stdio: ['ignore', 'pipe', 'pipe'],
  });
  server.stderr!.on('data', (chunk) => {
    stderrLog += chunk;
  });
  serverUrl = await new Promise<string>((resolve, reject) => {
    let buffer = '';
    const timer = setTimeout(
      () => reject(new Error(`server did not start\n${stderrLog}`)),
      20000,
    );
    server.stdout!.on('data', (chunk) => {
      buffer += chunk;
      const match = buffer.match(/listening on (ws:\/\/[\d.]+:\d+)/);
      if (match) {
        clearTimeout(timer);
        resolve(match[1]);
      }
    });
    server.on('exit', (code) => reject(new Error(`server exited ${code}\n${stderrLog}`)));
  });
});

afterAll(() => {
  server?.kill('SIGTERM');
});

/** Buffers every frame so tests can address them by arrival order. */
class Recorder {
  frames: Frame[] = [];
  private waiters: Array<{ count: number; resolve: () => void }> = [];

  push(frame: Frame): void {
    this.frames.push(frame);
    this.waiters = this.waiters.filter((w) => {
      if (this.frames.length >= w.count) {
        w.resolve();
        return false;
      }
      return true;
    });
  }

  untilCount(count: number, timeoutMs = 10000): Promise<void> {
    if (this.frames.length >= count) return Promise.resolve();
    return new Promise((resolve, reject) => {
      const timer = setTimeout(
        () => reject(new Error(`timed out waiting for frame ${count}`)),
        timeoutMs,
      );
      this.waiters.push({
        count,
        resolve: () => {
          clearTimeout(timer);
          resolve();
        },
      });
    });
  }

  get latest(): Frame {
    return this.frames[this.frames.length - 1];
  }
}

function nodeIndex(frame: Frame, id: number): number {
  for (let i = 0; i < frame.nodeIds.length; i++) {
    if (frame.nodeIds[i] === id) return i;
  }
  throw new Error(`node ${id} not in frame`);
}

function positionOf(frame: Frame, id: number): [number, number, number] {
  const i = nodeIndex(frame, id);
  return [frame.nodePos[3 * i], frame.nodePos[3 * i + 1], frame.nodePos[3 * i + 2]];
}

function maxDisplacement(a: Frame, b: Frame, ids: number[]): number {
  let most = 0;
  for (const id of ids) {
    const pa = positionOf(a, id);
    const pb = positionOf(b, id);
    const d = Math.hypot(pb[0] - pa[0], pb[1] - pa[1], pb[2] - pa[2]);
    if (d > most) most = d;
  }
  return most;
}

function distanceFrom(p: [number, number, number], c: [number, number, number]): number {
  return Math.hypot(p[0] - c[0], p[1] - c[1], p[2] - c[2]);
}

function rayTowards(target: [number, number, number]): {
  origin: [number, number, number];
  dir: [number, number, number];
} {
  const d: [number, number, number] = [
    target[0] - EYE[0],
    target[1] - EYE[1],
    target[2] - EYE[2],
  ];
  const len = Math.hypot(d[0], d[1], d[2]);
  return { origin: EYE, dir: [d[0] / len, d[1] / len, d[2] / len] };
}

describe('scripted session against a live server', () => {
  it('walks the full interaction sequence', async () => {
    const client = new EngineClient(serverUrl, {
      WebSocketImpl: WebSocket as unknown as SocketCtor,
    });
    const rec = new Recorder();
    const view = new SceneView();
    const picker = new PickIndex();

    let eventMark = 0; // frames seen before the most recent server event
    let membership: number[] = [];
    client.onEvent = () => {
      eventMark = rec.frames.length;
    };
    client.onFrame = (frame) => {
      rec.push(frame);
      view.update(frame);
      picker.rebuild(frame, membership.length ? membership : null);
    };

    await client.connect();

    const settle = async () => {
      await rec.untilCount(rec.frames.length + 14); // > 0.3 s at 30 fps
    };

    // wraps a command with the frame bookkeeping for the 2-frame check
    const apply = async (cmd: Command): Promise<{ before: Frame; after2: Frame[] }> => {
      const before = rec.latest;
      await client.request(cmd);
      const mark = eventMark;
      await rec.untilCount(mark + 2);
      return { before, after2: rec.frames.slice(mark, mark + 2) };
    };

    // --- overview ----------------------------------------------------------
    const graph = (await client.request({ type: 'loadGraph', name: 'medium' })) as GraphEvent;
    expect(graph.nodes).toBe(297);
    expect(graph.edges).toBe(2148);
    expect(graph.communities).toBe(13);
    expect(graph.membership.length).toBe(297);
    membership = graph.membership;

    // keep transitions short so the scripted session settles quickly
    // (engine settings only exist once a graph is loaded)
    await client.request({ type: 'setConfig', config: { transitionDuration: 0.3 } });

    await rec.untilCount(2);
    const overview = rec.latest;
    expect(overview.nodeIds.length).toBe(297);
    const allIds = Array.from(overview.nodeIds);
    for (const id of allIds) {
      // the whole network sits in the miniature ball in front of the eye
      expect(distanceFrom(positionOf(overview, id), [0, 1.4, 1.0])).toBeLessThan(0.45);
    }
    expect(view.nodeCount).toBe(297);
    expect(view.segmentCount).toBeGreaterThan(0);

    // pick the expansion target by ray, like a click on the miniature
    const target = picker.pickCommunity(rayTowards([0, 1.4, 1.0]));
    expect(target).not.toBeNull();
    expect(graph.topCommunities).toContain(target!.id);
    const members = allIds.filter((id) => membership[id] === target!.id);
    expect(members.length).toBeGreaterThan(3);

    // --- expand network ------------------------------------------------------
    const expandNet = await apply({ type: 'expandNetwork' });
    expect(maxDisplacement(expandNet.before, expandNet.after2[1], allIds)).toBeGreaterThan(1e-3);
    await settle();
    const onSphere = rec.latest;
    for (const id of allIds) {
      expect(Math.abs(distanceFrom(positionOf(onSphere, id), EYE) - 10)).toBeLessThan(0.05);
    }

    // --- expand community ----------------------------------------------------
    const expand = await apply({ type: 'expandCommunity', target: target!.id });
    expect(maxDisplacement(expand.before, expand.after2[1], members)).toBeGreaterThan(1e-3);
    // the expanded community's internal edges turn solid white immediately
    const white = expand.after2[0].edges.filter((e) =>
      e.rgba[0] === 255 && e.rgba[1] === 255 && e.rgba[2] === 255 && e.rgba[3] === 255,
    );
    expect(white.length).toBeGreaterThan(0);
    await settle();
    const floating = rec.latest;
    // single expanded community floats dead ahead of the eye, well off the
    // sphere; its local layout may still be relaxing, so allow the bounding
    // cube of the slot rather than the settled ball
    const centroid: [number, number, number] = [0, 0, 0];
    for (const id of members) {
      const p = positionOf(floating, id);
      expect(distanceFrom(p, [0, 1.6, 1.6])).toBeLessThan(1.2);
      centroid[0] += p[0] / members.length;
      centroid[1] += p[1] / members.length;
      centroid[2] += p[2] / members.length;
    }
    expect(distanceFrom(centroid, [0, 1.6, 1.6])).toBeLessThan(0.4);
    expect(floating.edges.some((e) => e.points.length > 6)).toBe(true);

    // --- project community ---------------------------------------------------
    const project = await apply({ type: 'projectCommunity', target: target!.id });
    expect(maxDisplacement(project.before, project.after2[1], members)).toBeGreaterThan(1e-3);
    await settle();
    const projected = rec.latest;
    for (const id of members) {
      const [x, y, z] = positionOf(projected, id);
      expect(Math.abs(y - 0.02)).toBeLessThan(0.01);
      expect(Math.hypot(x, z)).toBeLessThan(3.05);
    }

    // --- highlight node --------------------------------------------------------
    // aim a pick ray at a projected member, as the UI would on click
    const nodeHit = picker.pickNode(rayTowards(positionOf(projected, members[0])));
    expect(nodeHit).not.toBeNull();
    const preRadius = projected.nodeRadius[nodeIndex(projected, nodeHit!.id)];

    const highlight = await apply({ type: 'highlightNode', target: nodeHit!.id });
    const lit = highlight.after2[0];
    const idx = nodeIndex(lit, nodeHit!.id);
    expect(Array.from(lit.nodeRgba.slice(4 * idx, 4 * idx + 4))).toEqual([255, 36, 36, 255]);
    expect(lit.nodeRadius[idx] / preRadius).toBeGreaterThan(1.5);
    expect(lit.nodeRadius[idx] / preRadius).toBeLessThan(1.7);

    // --- server-side record -----------------------------------------------------
    const telemetry = (await client.request({
      type: 'setConfig',
      config: { flushTelemetry: true },
    })) as TelemetryEvent;
    const [header, row] = telemetry.csv.trim().split('\n');
    const fields = Object.fromEntries(
      header.split(',').map((name, i) => [name, row.split(',')[i]]),
    );
    expect(fields.graphID).toBe('medium');
    expect(fields.numberOfOverviews).toBe('1');
    expect(fields.numberOfSphericalViews).toBe('1');
    expect(fields.numberOfExpansions).toBe('1');
    expect(fields.numberOfProjections).toBe('1');
    expect(Number(fields.numberOfInteractions)).toBeGreaterThanOrEqual(5);

    client.close();
  });

  it('streams frames with advancing ids and matching node counts', async () => {
    const client = new EngineClient(serverUrl, {
      WebSocketImpl: WebSocket as unknown as SocketCtor,
    });
    const rec = new Recorder();
    client.onFrame = (frame) => rec.push(frame);
    await client.connect();
    await client.request({ type: 'loadGraph', name: 'easy' });
    await rec.untilCount(4);
    expect(rec.frames.every((f) => f.nodeIds.length === 115)).toBe(true);
    const ids = rec.frames.map((f) => f.frameId);
    for (let i = 1; i < ids.length; i++) expect(ids[i]).toBeGreaterThan(ids[i - 1]);
    client.close();
  });

  it('surfaces engine rejections as error events', async () => {
    const client = new EngineClient(serverUrl, {
      WebSocketImpl: WebSocket as unknown as SocketCtor,
    });
    await client.connect();
    const graph = (await client.request({ type: 'loadGraph', name: 'easy' })) as GraphEvent;
    // expanding a community before the network is expanded is invalid
    const top = graph.topCommunities[0];
    await expect(client.request({ type: 'expandCommunity', target: top })).rejects.toThrow(
      /InvalidState/,
    );
    client.close();
  });
});
