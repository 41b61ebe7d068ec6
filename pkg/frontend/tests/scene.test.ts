/**
 * Headless scene-graph tests: node placement, depth-relative sizing once a
 * face is snapped, merge highlighting, and the drag ghost.
 */

import * as THREE from "three";
import { describe, expect, it } from "vitest";

import { nodeDisplaySize } from "../src/geometry.js";
import type { Scores, Vec3 } from "../src/geometry.js";
import {
  buildCubeScene,
  buildGhost,
  moveGhost,
  renderedRadius,
  setMergeHighlight,
  updateCubeScene,
} from "../src/scene.js";
import type { DimensionPairView, NodeView } from "../src/types.js";

const SCALE = 0.07; // matches the scene's base radius multiplier

function pairView(
  id: string,
  poleA: string,
  poleB: string,
  axis: "X" | "Y" | "Z" | null,
  enabled = true,
): DimensionPairView {
  return {
    id,
    pole_a_name: poleA,
    pole_a_description: "",
    pole_b_name: poleB,
    pole_b_description: "",
    explanation: "",
    axis,
    enabled,
  };
}

function nodeAt(id: string, position: Vec3, scores: Scores = {}): NodeView {
  return {
    id,
    name: id,
    title: `Idea ${id}`,
    problem: "",
    scores: {
      entries: Object.fromEntries(
        Object.entries(scores).map(([pid, score]) => [pid, { score, reasoning: "" }]),
      ),
    },
    parents: [],
    origin: "seed",
    created_at: 0,
    position,
    display_size: nodeDisplaySize(position.z),
  };
}

const DIMENSIONS = [
  pairView("dx", "Cloud", "Edge", "X"),
  pairView("dy", "Privacy", "Utility", "Y"),
  pairView("dz", "Individual", "Population", "Z"),
];

describe("renderedRadius", () => {
  it("uses depth toward the snapped face", () => {
    // privacy-leaning idea viewed from the privacy side reads large
    const privacyLeaning = { x: -0.3, y: -0.7, z: -0.8 };
    expect(renderedRadius(privacyLeaning, "NegY")).toBe(1.35);
    const utilityLeaning = { x: 0.3, y: 0.4, z: 0.0 };
    expect(renderedRadius(utilityLeaning, "NegY")).toBe(0.8);
    expect(renderedRadius(privacyLeaning, "NegY")).toBeGreaterThan(
      renderedRadius(utilityLeaning, "NegY"),
    );
  });

  it("falls back to plain z depth with no face", () => {
    expect(renderedRadius({ x: 0, y: 0, z: 1 }, null)).toBe(1.5);
    expect(renderedRadius({ x: 0, y: 0, z: -1 }, null)).toBe(0.5);
  });
});

describe("buildCubeScene", () => {
  it("places one sphere per node at its exact position", () => {
    const nodes = [
      nodeAt("a", { x: -0.4, y: 0.2, z: 0.6 }),
      nodeAt("b", { x: 0.5, y: 0.3, z: 0.6 }),
    ];
    const scene = buildCubeScene(nodes, DIMENSIONS);
    expect(scene.nodeMeshes.size).toBe(2);
    const meshA = scene.nodeMeshes.get("a");
    expect(meshA).toBeDefined();
    expect(meshA!.position.toArray()).toStrictEqual([-0.4, 0.2, 0.6]);
    expect(meshA!.userData["nodeId"]).toBe("a");
    // the frame plus two node spheres all live under one group
    expect(scene.group.children.length).toBe(3);
  });

  it("scales spheres by rendered radius", () => {
    const nodes = [
      nodeAt("near", { x: 0, y: 0, z: 1 }),
      nodeAt("far", { x: 0, y: 0, z: -1 }),
    ];
    const scene = buildCubeScene(nodes, DIMENSIONS);
    expect(scene.nodeMeshes.get("near")!.scale.x).toBeCloseTo(1.5 * SCALE, 12);
    expect(scene.nodeMeshes.get("far")!.scale.x).toBeCloseTo(0.5 * SCALE, 12);
    expect(scene.nodeMeshes.get("near")!.scale.x).toBeGreaterThan(
      scene.nodeMeshes.get("far")!.scale.x,
    );
  });

  it("labels both poles of each enabled axis and skips disabled ones", () => {
    const dims = [
      pairView("dx", "Cloud", "Edge", "X"),
      pairView("dy", "Privacy", "Utility", "Y", false),
      pairView("dz", "Individual", "Population", "Z"),
      pairView("du", "Unassigned", "Pair", null),
    ];
    const scene = buildCubeScene([], dims);
    expect(scene.labels).toHaveLength(4); // X and Z only, two poles each
    const xLabels = scene.labels.filter((l) => l.axis === "X");
    expect(xLabels.map((l) => l.text)).toStrictEqual(["Cloud", "Edge"]);
    // pole A sits on the negative end (negative scores lean toward pole A)
    expect(xLabels[0]?.anchor.x).toBeLessThan(0);
    expect(xLabels[1]?.anchor.x).toBeGreaterThan(0);
    expect(scene.labels.some((l) => l.axis === "Y")).toBe(false);
  });
});

describe("updateCubeScene", () => {
  it("moves meshes and resizes them for the new face", () => {
    const nodes = [nodeAt("a", { x: 0.1, y: 0.1, z: 0.1 })];
    const scene = buildCubeScene(nodes, DIMENSIONS);
    const moved = [nodeAt("a", { x: -0.3, y: -0.7, z: -0.8 })];
    updateCubeScene(scene, moved, { face: "NegY" });
    const mesh = scene.nodeMeshes.get("a")!;
    expect(mesh.position.toArray()).toStrictEqual([-0.3, -0.7, -0.8]);
    expect(mesh.scale.x).toBeCloseTo(1.35 * SCALE, 12);
  });
});

describe("setMergeHighlight", () => {
  it("lights exactly the candidate and clears on null", () => {
    const nodes = [
      nodeAt("a", { x: 0, y: 0, z: 0 }),
      nodeAt("b", { x: 0.1, y: 0, z: 0 }),
    ];
    const scene = buildCubeScene(nodes, DIMENSIONS);
    setMergeHighlight(scene, "b");
    const emissiveOf = (id: string) =>
      (scene.nodeMeshes.get(id)!.material as THREE.MeshStandardMaterial).emissive.getHex();
    expect(emissiveOf("b")).toBe(0x805020);
    expect(emissiveOf("a")).toBe(0x000000);
    setMergeHighlight(scene, null);
    expect(emissiveOf("b")).toBe(0x000000);
  });
});

describe("drag ghost", () => {
  it("starts at the source and tracks the pointer with its tether", () => {
    const source = { x: -0.4, y: 0.2, z: 0.6 };
    const ghost = buildGhost(source, 1.0);
    expect(ghost.sphere.position.toArray()).toStrictEqual([-0.4, 0.2, 0.6]);
    expect((ghost.sphere.material as THREE.MeshStandardMaterial).transparent).toBe(true);

    moveGhost(ghost, source, { x: 0.6, y: 0.44, z: 0.6 });
    expect(ghost.sphere.position.toArray()).toStrictEqual([0.6, 0.44, 0.6]);
    // line vertices are float32; close is good enough for a visual tether
    const line = ghost.line.geometry.getAttribute("position");
    const vertex = (i: number) => [line.getX(i), line.getY(i), line.getZ(i)];
    const expectClose = (got: number[], want: number[]) =>
      got.forEach((v, i) => expect(v).toBeCloseTo(want[i]!, 6));
    expectClose(vertex(0), [-0.4, 0.2, 0.6]);
    expectClose(vertex(1), [0.6, 0.44, 0.6]);
  });
});
