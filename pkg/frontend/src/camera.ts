// Egocentric free-look: drag to look around, WASD to walk, QZ for height.
// The math lives here DOM-free; main.ts feeds it input events.

import * as THREE from 'three';

const LOOK_SPEED = 0.0025;
const MOVE_SPEED = 1.5; // m/s
const PITCH_LIMIT = Math.PI / 2 - 0.01;

export class FlyControls {
  yaw = 0; // 0 faces +Z to match the scene's forward axis
  pitch = 0;
  private keys = new Set<string>();

  constructor(readonly camera: THREE.PerspectiveCamera) {
    this.apply();
  }

  handleMouseDelta(dx: number, dy: number): void {
    this.yaw -= dx * LOOK_SPEED;
    this.pitch -= dy * LOOK_SPEED;
    this.pitch = Math.max(-PITCH_LIMIT, Math.min(PITCH_LIMIT, this.pitch));
    this.apply();
  }

  handleKey(code: string, down: boolean): void {
    if (down) this.keys.add(code);
    else this.keys.delete(code);
  }

  update(dt: number): void {
    const forward = this.forward();
    const right = new THREE.Vector3(forward.z, 0, -forward.x).normalize();
    const step = MOVE_SPEED * dt;
    const move = new THREE.Vector3();
    if (this.keys.has('KeyW')) move.addScaledVector(forward, step);
    if (this.keys.has('KeyS')) move.addScaledVector(forward, -step);
    if (this.keys.has('KeyA')) move.addScaledVector(right, -step);
    if (this.keys.has('KeyD')) move.addScaledVector(right, step);
    if (this.keys.has('KeyQ')) move.y += step;
    if (this.keys.has('KeyZ')) move.y -= step;
    this.camera.position.add(move);
  }

  forward(): THREE.Vector3 {
    return new THREE.Vector3(
      Math.sin(this.yaw) * Math.cos(this.pitch),
      Math.sin(this.pitch),
      Math.cos(this.yaw) * Math.cos(this.pitch),
    );
  }

  private apply(): void {
    const target = this.camera.position.clone().add(this.forward());
    this.camera.lookAt(target);
  }
}
