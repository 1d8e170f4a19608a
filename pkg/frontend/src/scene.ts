// Translates decoded frames into three.js objects: one instanced sphere
// mesh for nodes, one LineSegments batch for every edge polyline, and a
// LineLoop per highlight ring.

import * as THREE from 'three';
import type { Frame } from './protocol';
import { pointCount } from './protocol';

const SPHERE = new THREE.SphereGeometry(1, 16, 12);

export class SceneView {
  readonly root = new THREE.Group();
  private nodeMesh: THREE.InstancedMesh | null = null;
  private edgeLines: THREE.LineSegments | null = null;
  private ringGroup = new THREE.Group();
  private tmpMatrix = new THREE.Matrix4();
  private tmpColor = new THREE.Color();

  constructor() {
    this.root.add(this.ringGroup);
  }

  get nodeCount(): number {
    return this.nodeMesh?.count ?? 0;
  }

  get segmentCount(): number {
    const geo = this.edgeLines?.geometry;
    return geo ? geo.getAttribute('position').count / 2 : 0;
  }

  update(frame: Frame): void {
    this.updateNodes(frame);
    this.updateEdges(frame);
    this.updateRings(frame);
  }

  private updateNodes(frame: Frame): void {
    const n = frame.nodeIds.length;
    if (!this.nodeMesh || this.nodeMesh.count !== n) {
      if (this.nodeMesh) {
        this.root.remove(this.nodeMesh);
        this.nodeMesh.dispose();
      }
      this.nodeMesh = null;
      if (n > 0) {
        const material = new THREE.MeshBasicMaterial();
        this.nodeMesh = new THREE.InstancedMesh(SPHERE, material, n);
        this.root.add(this.nodeMesh);
      }
    }
    if (!this.nodeMesh) return;
    for (let i = 0; i < n; i++) {
      const r = frame.nodeRadius[i];
      this.tmpMatrix.makeScale(r, r, r);
      this.tmpMatrix.setPosition(
        frame.nodePos[3 * i],
        frame.nodePos[3 * i + 1],
        frame.nodePos[3 * i + 2],
      );
      this.nodeMesh.setMatrixAt(i, this.tmpMatrix);
      this.tmpColor.setRGB(
        frame.nodeRgba[4 * i] / 255,
        frame.nodeRgba[4 * i + 1] / 255,
        frame.nodeRgba[4 * i + 2] / 255,
      );
      this.nodeMesh.setColorAt(i, this.tmpColor);
    }
    this.nodeMesh.instanceMatrix.needsUpdate = true;
    if (this.nodeMesh.instanceColor) this.nodeMesh.instanceColor.needsUpdate = true;
  }

  private updateEdges(frame: Frame): void {
    let segments = 0;
    for (const e of frame.edges) segments += pointCount(e) - 1;

    const positions = new Float32Array(segments * 6);
    const colors = new Float32Array(segments * 6);
    let w = 0;
    for (const e of frame.edges) {
      // the renderer draws on black; folding alpha into the color gives
      // per-edge opacity without a custom line shader
      const a = e.rgba[3] / 255;
      const cr = (e.rgba[0] / 255) * a;
      const cg = (e.rgba[1] / 255) * a;
      const cb = (e.rgba[2] / 255) * a;
      const k = pointCount(e);
      for (let i = 0; i < k - 1; i++) {
        positions.set(e.points.subarray(3 * i, 3 * i + 6), w);
        colors[w] = cr;
        colors[w + 1] = cg;
        colors[w + 2] = cb;
        colors[w + 3] = cr;
        colors[w + 4] = cg;
        colors[w + 5] = cb;
        w += 6;
      }
    }

    if (this.edgeLines) {
      this.root.remove(this.edgeLines);
      this.edgeLines.geometry.dispose();
    }
    const geo = new THREE.BufferGeometry();
    geo.setAttribute('position', new THREE.BufferAttribute(positions, 3));
    geo.setAttribute('color', new THREE.BufferAttribute(colors, 3));
    this.edgeLines = new THREE.LineSegments(
      geo,
      new THREE.LineBasicMaterial({ vertexColors: true }),
    );
    this.root.add(this.edgeLines);
  }

  private updateRings(frame: Frame): void {
    this.ringGroup.clear();
    for (const ring of frame.rings) {
      const pts: THREE.Vector3[] = [];
      for (let i = 0; i < 64; i++) {
        const a = (2 * Math.PI * i) / 64;
        pts.push(
          new THREE.Vector3(
            ring.center[0] + ring.radius * Math.cos(a),
            ring.center[1],
            ring.center[2] + ring.radius * Math.sin(a),
          ),
        );
      }
      const geo = new THREE.BufferGeometry().setFromPoints(pts);
      const material = new THREE.LineBasicMaterial({
        color: new THREE.Color(ring.rgba[0] / 255, ring.rgba[1] / 255, ring.rgba[2] / 255),
      });
      this.ringGroup.add(new THREE.LineLoop(geo, material));
    }
  }
}
