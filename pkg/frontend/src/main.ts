// Browser entry point: connect to the engine, render frames, forward input.
//
// Query parameters:
//   ?server=ws://host:port   engine address (default ws://127.0.0.1:8765)
//   ?graph=medium            preset to load on startup
//   ?format=json             ask for JSON frames instead of binary

import * as THREE from 'three';
import { FlyControls } from './camera';
import { EngineClient } from './client';
import { mountLegend } from './legend';
import { PickHit, PickIndex } from './picking';
import { Command, Frame, GraphEvent } from './protocol';
import { SceneView } from './scene';

const params = new URLSearchParams(window.location.search);
const serverUrl = params.get('server') ?? 'ws://127.0.0.1:8765';
const graphName = params.get('graph') ?? 'medium';
const frameFormat = params.get('format') === 'json' ? 'json' : 'binary';

const renderer = new THREE.WebGLRenderer({ antialias: true });
renderer.setSize(window.innerWidth, window.innerHeight);
renderer.setPixelRatio(window.devicePixelRatio);
document.body.appendChild(renderer.domElement);

const scene = new THREE.Scene();
scene.background = new THREE.Color(0x000000);
scene.add(new THREE.AmbientLight(0xffffff, 0.8));
const sun = new THREE.DirectionalLight(0xffffff, 1.2);
sun.position.set(3, 10, 4);
scene.add(sun);

// Eye height matches the engine's spherical layout center.
const camera = new THREE.PerspectiveCamera(
  75,
  window.innerWidth / window.innerHeight,
  0.01,
  100,
);
camera.position.set(0, 1.6, 0);
const controls = new FlyControls(camera);

const view = new SceneView();
scene.add(view.root);

const floor = new THREE.Mesh(
  new THREE.CircleGeometry(6, 48),
  new THREE.MeshBasicMaterial({ color: 0x101018, side: THREE.DoubleSide }),
);
floor.rotation.x = -Math.PI / 2;
scene.add(floor);

const legend = mountLegend(document.body);
const picker = new PickIndex();

let membership: number[] | null = null;
let latestFrame: Frame | null = null;
let selected: PickHit | null = null;

const client = new EngineClient(serverUrl);

client.onStateChange = (state) => legend.setStatus(`${state} ${serverUrl}`);

client.onFrame = (frame) => {
  latestFrame = frame;
  view.update(frame);
  picker.rebuild(frame, membership);
};

client.onEvent = (ev) => {
  if (ev.type === 'graph') {
    const g = ev as GraphEvent;
    membership = g.membership;
    legend.setStatus(`${g.name}: ${g.nodes} nodes, ${g.edges} edges, ${g.communities} communities`);
  } else if (ev.type === 'error') {
    legend.setStatus(`error: ${ev.message}`);
    console.warn('engine error:', ev.message);
  }
};

function send(cmd: Command): void {
  try {
    client.sendCommand(cmd);
  } catch (err) {
    legend.setStatus(String(err));
  }
}

function describeSelection(): string {
  if (!selected) return 'nothing selected';
  return selected.kind === 'node'
    ? `node ${selected.id}`
    : `community ${selected.id}`;
}

// --- input -----------------------------------------------------------------

let dragging = false;
renderer.domElement.addEventListener('mousedown', () => {
  dragging = false;
});
renderer.domElement.addEventListener('mousemove', (ev) => {
  if (ev.buttons & 1) {
    dragging = true;
    controls.handleMouseDelta(ev.movementX, ev.movementY);
  }
});
renderer.domElement.addEventListener('click', (ev) => {
  if (dragging || !latestFrame) return;
  const ndc = new THREE.Vector2(
    (ev.clientX / window.innerWidth) * 2 - 1,
    -(ev.clientY / window.innerHeight) * 2 + 1,
  );
  const ray = new THREE.Raycaster();
  ray.setFromCamera(ndc, camera);
  selected = picker.pickAny({
    origin: [ray.ray.origin.x, ray.ray.origin.y, ray.ray.origin.z],
    dir: [ray.ray.direction.x, ray.ray.direction.y, ray.ray.direction.z],
  });
  legend.setSelection(describeSelection());
});

window.addEventListener('keydown', (ev) => {
  controls.handleKey(ev.code, true);
  switch (ev.code) {
    case 'KeyE':
      if (selected?.kind === 'community') send({ type: 'expandCommunity', target: selected.id });
      else send({ type: 'expandNetwork' });
      break;
    case 'KeyP':
      if (selected?.kind === 'community') send({ type: 'projectCommunity', target: selected.id });
      break;
    case 'KeyR':
      if (selected?.kind === 'community') send({ type: 'resetCommunity', target: selected.id });
      break;
    case 'KeyH':
      if (selected?.kind === 'node') send({ type: 'highlightNode', target: selected.id });
      break;
    case 'KeyC':
      if (selected?.kind === 'community') send({ type: 'highlightCommunity', target: selected.id });
      break;
    case 'KeyX':
      send({ type: 'clearHighlight' });
      break;
    case 'KeyG':
      send({ type: 'loadGraph', name: graphName });
      break;
  }
});
window.addEventListener('keyup', (ev) => controls.handleKey(ev.code, false));

window.addEventListener('resize', () => {
  camera.aspect = window.innerWidth / window.innerHeight;
  camera.updateProjectionMatrix();
  renderer.setSize(window.innerWidth, window.innerHeight);
});

// --- boot ------------------------------------------------------------------

async function boot(): Promise<void> {
  await client.connect();
  if (frameFormat === 'json') {
    await client.request({ type: 'setConfig', config: { frameFormat: 'json' } });
  }
  await client.request({ type: 'loadGraph', name: graphName });
}

boot().catch((err) => {
  legend.setStatus(String(err));
  console.error(err);
});

let last = performance.now();
function animate(now: number): void {
  controls.update((now - last) / 1000);
  last = now;
  renderer.render(scene, camera);
  requestAnimationFrame(animate);
}
requestAnimationFrame(animate);
