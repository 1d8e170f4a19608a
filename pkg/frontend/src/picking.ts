// Ray picking against the latest frame: nodes as spheres, communities as
// centroid spheres derived from their member nodes.

import type { Frame } from './protocol';

export interface Ray {
  origin: [number, number, number];
  dir: [number, number, number]; // unit length
}

export interface PickHit {
  kind: 'node' | 'community';
  id: number;
  t: number; // distance along the ray
}

interface Sphere {
  id: number;
  x: number;
  y: number;
  z: number;
  r: number;
}

function rayHit(ray: Ray, s: Sphere): number | null {
  const ox = s.x - ray.origin[0];
  const oy = s.y - ray.origin[1];
  const oz = s.z - ray.origin[2];
  const t = ox * ray.dir[0] + oy * ray.dir[1] + oz * ray.dir[2];
  if (t <= 0) return null;
  const px = ox - t * ray.dir[0];
  const py = oy - t * ray.dir[1];
  const pz = oz - t * ray.dir[2];
  const d2 = px * px + py * py + pz * pz;
  return d2 <= s.r * s.r ? t : null;
}

export class PickIndex {
  private nodes: Sphere[] = [];
  private communities: Sphere[] = [];

  /**
   * Rebuild from the latest frame. `membership` maps node id to its
   * top-level community (from the graph event); without it only node
   * picking works. `minRadius` keeps small nodes clickable.
   */
  rebuild(frame: Frame, membership: number[] | null, minRadius = 0.02): void {
    const n = frame.nodeIds.length;
    this.nodes = [];
    for (let i = 0; i < n; i++) {
      this.nodes.push({
        id: frame.nodeIds[i],
        x: frame.nodePos[3 * i],
        y: frame.nodePos[3 * i + 1],
        z: frame.nodePos[3 * i + 2],
        r: Math.max(frame.nodeRadius[i], minRadius),
      });
    }

    this.communities = [];
    if (!membership) return;
    const acc = new Map<number, { sx: number; sy: number; sz: number; count: number }>();
    for (let i = 0; i < n; i++) {
      const c = membership[frame.nodeIds[i]];
      if (c === undefined) continue;
      let a = acc.get(c);
      if (!a) {
        a = { sx: 0, sy: 0, sz: 0, count: 0 };
        acc.set(c, a);
      }
      a.sx += frame.nodePos[3 * i];
      a.sy += frame.nodePos[3 * i + 1];
      a.sz += frame.nodePos[3 * i + 2];
      a.count++;
    }
    const radius = new Map<number, number>();
    for (const [c, a] of acc) {
      acc.set(c, { sx: a.sx / a.count, sy: a.sy / a.count, sz: a.sz / a.count, count: a.count });
      radius.set(c, 0);
    }
    for (let i = 0; i < n; i++) {
      const c = membership[frame.nodeIds[i]];
      const a = acc.get(c);
      if (!a) continue;
      const dx = frame.nodePos[3 * i] - a.sx;
      const dy = frame.nodePos[3 * i + 1] - a.sy;
      const dz = frame.nodePos[3 * i + 2] - a.sz;
      const d = Math.sqrt(dx * dx + dy * dy + dz * dz) + frame.nodeRadius[i];
      if (d > radius.get(c)!) radius.set(c, d);
    }
    for (const [c, a] of acc) {
      this.communities.push({ id: c, x: a.sx, y: a.sy, z: a.sz, r: radius.get(c)! });
    }
  }

  pickNode(ray: Ray): PickHit | null {
    return this.pick(ray, this.nodes, 'node');
  }

  pickCommunity(ray: Ray): PickHit | null {
    return this.pick(ray, this.communities, 'community');
  }

  /** Nearest node if the ray hits one, otherwise nearest community. */
  pickAny(ray: Ray): PickHit | null {
    return this.pickNode(ray) ?? this.pickCommunity(ray);
  }

  private pick(ray: Ray, spheres: Sphere[], kind: PickHit['kind']): PickHit | null {
    let best: PickHit | null = null;
    for (const s of spheres) {
      const t = rayHit(ray, s);
      if (t !== null && (best === null || t < best.t)) {
        best = { kind, id: s.id, t };
      }
    }
    return best;
  }
}
