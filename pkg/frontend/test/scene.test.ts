import * as THREE from 'three';
import { describe, expect, it } from 'vitest';
import type { EdgePolyline, Frame, RingMark } from '../src/protocol';
import { SceneView } from '../src/scene';

function makeFrame(
  positions: Array<[number, number, number]>,
  edges: EdgePolyline[] = [],
  rings: RingMark[] = [],
): Frame {
  const n = positions.length;
  const frame: Frame = {
    frameId: 7,
    nodeIds: new Uint32Array(n),
    nodePos: new Float32Array(3 * n),
    nodeRadius: new Float32Array(n).fill(0.25),
    nodeRgba: new Uint8Array(4 * n).fill(200),
    edges,
    rings,
  };
  positions.forEach((p, i) => {
    frame.nodeIds[i] = i;
    frame.nodePos.set(p, 3 * i);
  });
  return frame;
}

function edge(id: number, pts: number[], rgba: [number, number, number, number]): EdgePolyline {
  return { id, points: new Float32Array(pts), rgba: new Uint8Array(rgba), width: 1 };
}

function find<T extends THREE.Object3D>(
  view: SceneView,
  klass: new (...args: any[]) => T,
): T[] {
  const out: T[] = [];
  view.root.traverse((obj) => {
    if (obj instanceof klass) out.push(obj);
  });
  return out;
}

describe('scene building', () => {
  it('places one instanced sphere per node', () => {
    const view = new SceneView();
    view.update(makeFrame([[0, 1, 2], [3, 4, 5], [6, 7, 8]]));
    expect(view.nodeCount).toBe(3);

    const mesh = find(view, THREE.InstancedMesh)[0];
    const m = new THREE.Matrix4();
    mesh.getMatrixAt(1, m);
    const pos = new THREE.Vector3().setFromMatrixPosition(m);
    expect([pos.x, pos.y, pos.z]).toEqual([3, 4, 5]);
    const scale = new THREE.Vector3().setFromMatrixScale(m);
    expect(scale.x).toBeCloseTo(0.25, 6);
  });

  it('rebuilds the mesh when the node count changes', () => {
    const view = new SceneView();
    view.update(makeFrame([[0, 0, 0], [1, 1, 1]]));
    const before = find(view, THREE.InstancedMesh)[0];
    view.update(makeFrame([[0, 0, 0], [1, 1, 1], [2, 2, 2]]));
    const after = find(view, THREE.InstancedMesh)[0];
    expect(view.nodeCount).toBe(3);
    expect(after).not.toBe(before);
    expect(find(view, THREE.InstancedMesh).length).toBe(1);
  });

  it('splits polylines into line segments', () => {
    const view = new SceneView();
    const straight = edge(0, [0, 0, 0, 1, 0, 0], [255, 255, 255, 255]);
    const spline = edge(1, [0, 0, 0, 0.5, 0.2, 0, 1, 0.2, 0, 1.5, 0, 0], [10, 20, 30, 229]);
    view.update(makeFrame([[0, 0, 0]], [straight, spline]));
    // 2-point edge -> 1 segment, 4-point edge -> 3 segments
    expect(view.segmentCount).toBe(4);

    const lines = find(view, THREE.LineSegments)[0];
    const pos = lines.geometry.getAttribute('position');
    expect(pos.count).toBe(8);
    expect(pos.getX(1)).toBeCloseTo(1, 6);
  });

  it('folds edge alpha into the vertex color', () => {
    const view = new SceneView();
    view.update(makeFrame([[0, 0, 0]], [edge(0, [0, 0, 0, 1, 0, 0], [255, 255, 255, 128])]));
    const lines = find(view, THREE.LineSegments)[0];
    const color = lines.geometry.getAttribute('color');
    expect(color.getX(0)).toBeCloseTo(128 / 255, 5);
    expect(color.getY(1)).toBeCloseTo(128 / 255, 5);
  });

  it('draws one horizontal loop per ring', () => {
    const view = new SceneView();
    const ring: RingMark = {
      community: 12,
      center: [1, 0.02, -2],
      radius: 0.8,
      rgba: [255, 36, 36, 255],
    };
    view.update(makeFrame([], [], [ring]));
    const loops = find(view, THREE.LineLoop);
    expect(loops.length).toBe(1);
    const pos = loops[0].geometry.getAttribute('position');
    expect(pos.count).toBe(64);
    for (let i = 0; i < pos.count; i++) {
      expect(pos.getY(i)).toBeCloseTo(0.02, 6);
      const r = Math.hypot(pos.getX(i) - 1, pos.getZ(i) + 2);
      expect(r).toBeCloseTo(0.8, 5);
    }
    view.update(makeFrame([]));
    expect(find(view, THREE.LineLoop).length).toBe(0);
  });
});
