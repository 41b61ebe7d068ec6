/**
 * Three.js scene graph for the evaluation cube.
 *
 * Pure construction: everything here works without a renderer or DOM, so
 * tests can assert node placement and sizing headlessly. `main.ts` owns
 * the WebGL renderer, camera, and pointer wiring.
 *
 * Nodes sit at their score positions inside the [-1, +1] cube. Once the
 * camera has snapped to a face, a node's rendered radius follows its depth
 * toward that face: ideas on the pole the viewer is looking at read as
 * close, and therefore large.
 */

import * as THREE from "three";

import { AXES, depthTowardFace, nodeDisplaySize } from "./geometry.js";
import type { Axis, Face, Vec3 } from "./geometry.js";
import type { DimensionPairView, NodeView } from "./types.js";

/** Base radius multiplier that keeps a size-1.5 node well inside the cube. */
const NODE_RENDER_SCALE = 0.07;

const ORIGIN_COLORS: Record<string, number> = {
  seed: 0x4c8dd6,
  steered: 0xd6a44c,
  merged: 0x9b59b6,
  fragment: 0x52b788,
};

export interface AxisLabel {
  axis: Axis;
  pairId: string;
  text: string;
  anchor: Vec3;
}

export interface CubeScene {
  group: THREE.Group;
  nodeMeshes: Map<string, THREE.Mesh>;
  labels: AxisLabel[];
}

export interface SceneOptions {
  radiusMin?: number;
  radiusMax?: number;
  face?: Face | null;
}

function labelAnchor(axis: Axis, end: -1 | 1): Vec3 {
  const distance = 1.18 * end;
  if (axis === "X") return { x: distance, y: 0, z: 0 };
  if (axis === "Y") return { x: 0, y: distance, z: 0 };
  return { x: 0, y: 0, z: distance };
}

/** Rendered radius for one node given the snapped face (or plain depth). */
export function renderedRadius(
  position: Vec3,
  face: Face | null,
  radiusMin = 0.5,
  radiusMax = 1.5,
): number {
  const depth = face === null ? position.z : depthTowardFace(position, face);
  return nodeDisplaySize(depth, radiusMin, radiusMax);
}

export function buildCubeScene(
  nodes: NodeView[],
  dimensions: DimensionPairView[],
  options: SceneOptions = {},
): CubeScene {
  const radiusMin = options.radiusMin ?? 0.5;
  const radiusMax = options.radiusMax ?? 1.5;
  const face = options.face ?? null;

  const group = new THREE.Group();
  group.name = "evaluation-cube";

  const frame = new THREE.LineSegments(
    new THREE.EdgesGeometry(new THREE.BoxGeometry(2, 2, 2)),
    new THREE.LineBasicMaterial({ color: 0x777788 }),
  );
  frame.name = "cube-frame";
  group.add(frame);

  const sphere = new THREE.SphereGeometry(1, 24, 16);
  const nodeMeshes = new Map<string, THREE.Mesh>();
  for (const node of nodes) {
    const material = new THREE.MeshStandardMaterial({
      color: ORIGIN_COLORS[node.origin] ?? 0x888888,
    });
    const mesh = new THREE.Mesh(sphere, material);
    mesh.name = `node:${node.id}`;
    mesh.position.set(node.position.x, node.position.y, node.position.z);
    const radius = renderedRadius(node.position, face, radiusMin, radiusMax);
    mesh.scale.setScalar(radius * NODE_RENDER_SCALE);
    mesh.userData = { nodeId: node.id, title: node.title };
    nodeMeshes.set(node.id, mesh);
    group.add(mesh);
  }

  // Pole labels only for enabled axes; negative end carries pole A
  // (negative scores lean toward pole A).
  const labels: AxisLabel[] = [];
  const byAxis = new Map<Axis, DimensionPairView>();
  for (const pair of dimensions) {
    if (pair.axis !== null && pair.enabled) {
      byAxis.set(pair.axis, pair);
    }
  }
  for (const axis of AXES) {
    const pair = byAxis.get(axis);
    if (pair === undefined) {
      continue;
    }
    labels.push({ axis, pairId: pair.id, text: pair.pole_a_name, anchor: labelAnchor(axis, -1) });
    labels.push({ axis, pairId: pair.id, text: pair.pole_b_name, anchor: labelAnchor(axis, 1) });
  }

  return { group, nodeMeshes, labels };
}

/** Re-apply positions and face-relative sizes after a state refresh or snap. */
export function updateCubeScene(
  scene: CubeScene,
  nodes: NodeView[],
  options: SceneOptions = {},
): void {
  const radiusMin = options.radiusMin ?? 0.5;
  const radiusMax = options.radiusMax ?? 1.5;
  const face = options.face ?? null;
  for (const node of nodes) {
    const mesh = scene.nodeMeshes.get(node.id);
    if (mesh === undefined) {
      continue;
    }
    mesh.position.set(node.position.x, node.position.y, node.position.z);
    const radius = renderedRadius(node.position, face, radiusMin, radiusMax);
    mesh.scale.setScalar(radius * NODE_RENDER_SCALE);
  }
}

/** Highlight the merge candidate (or clear every highlight with null). */
export function setMergeHighlight(scene: CubeScene, targetId: string | null): void {
  for (const [nodeId, mesh] of scene.nodeMeshes) {
    const material = mesh.material as THREE.MeshStandardMaterial;
    material.emissive.setHex(nodeId === targetId ? 0x805020 : 0x000000);
  }
}

export interface GhostHandle {
  group: THREE.Group;
  sphere: THREE.Mesh;
  line: THREE.Line;
}

/** Translucent ghost sphere plus the dashed trajectory back to the source. */
export function buildGhost(source: Vec3, radius: number): GhostHandle {
  const group = new THREE.Group();
  group.name = "drag-ghost";
  const sphere = new THREE.Mesh(
    new THREE.SphereGeometry(1, 16, 12),
    new THREE.MeshStandardMaterial({ color: 0xffffff, transparent: true, opacity: 0.45 }),
  );
  sphere.position.set(source.x, source.y, source.z);
  sphere.scale.setScalar(radius * NODE_RENDER_SCALE);
  const geometry = new THREE.BufferGeometry().setFromPoints([
    new THREE.Vector3(source.x, source.y, source.z),
    new THREE.Vector3(source.x, source.y, source.z),
  ]);
  const line = new THREE.Line(
    geometry,
    new THREE.LineDashedMaterial({ color: 0xddddee, dashSize: 0.05, gapSize: 0.03 }),
  );
  line.computeLineDistances();
  group.add(sphere);
  group.add(line);
  return { group, sphere, line };
}

export function moveGhost(ghost: GhostHandle, source: Vec3, position: Vec3): void {
  ghost.sphere.position.set(position.x, position.y, position.z);
  const points = [
    new THREE.Vector3(source.x, source.y, source.z),
    new THREE.Vector3(position.x, position.y, position.z),
  ];
  ghost.line.geometry.setFromPoints(points);
  ghost.line.computeLineDistances();
}
