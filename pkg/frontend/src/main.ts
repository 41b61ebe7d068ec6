/**
 * Browser entry point: wires the renderer, pointer gestures, dimension
 * panel, post-drag dialog, dashboard, and provenance tree to the
 * controller. Everything testable lives in the other modules; this file
 * is the thin DOM/WebGL shell around them.
 */

import * as THREE from "three";

import { ApiClient } from "./api.js";
import { CubeController } from "./controller.js";
import type { DragState } from "./controller.js";
import { dashboardRows } from "./dashboard.js";
import { FACE_NORMALS, visibleAxes } from "./geometry.js";
import type { Axis, Face, Vec3 } from "./geometry.js";
import {
  buildCubeScene,
  buildGhost,
  moveGhost,
  renderedRadius,
  setMergeHighlight,
  updateCubeScene,
} from "./scene.js";
import type { CubeScene, GhostHandle } from "./scene.js";
import { layoutTree } from "./tree.js";

const CAMERA_DISTANCE = 3.2;
const SVG_NS = "http://www.w3.org/2000/svg";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className !== undefined) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function getComponent(p: Vec3, axis: Axis): number {
  return axis === "X" ? p.x : axis === "Y" ? p.y : p.z;
}

class CubeApp {
  private readonly apiClient: ApiClient;
  private readonly controller: CubeController;
  private readonly renderer: THREE.WebGLRenderer;
  private readonly camera: THREE.PerspectiveCamera;
  private readonly stage = new THREE.Scene();
  private readonly raycaster = new THREE.Raycaster();

  private cubeScene: CubeScene | null = null;
  private ghost: GhostHandle | null = null;

  // orbit state between pointerdown and pointerup on the background
  private orbiting = false;
  private theta = Math.PI / 5;
  private phi = Math.PI / 2.6;

  private readonly canvasHost: HTMLElement;
  private readonly sidePanel: HTMLElement;
  private readonly dialogHost: HTMLElement;
  private readonly treeHost: HTMLElement;

  constructor(
    private readonly root: HTMLElement,
    baseUrl: string,
  ) {
    this.apiClient = new ApiClient(baseUrl);
    this.controller = new CubeController(this.apiClient);
    this.renderer = new THREE.WebGLRenderer({ antialias: true });
    this.camera = new THREE.PerspectiveCamera(40, 4 / 3, 0.1, 100);

    this.canvasHost = el("div", "cube-stage");
    this.sidePanel = el("div", "side-panel");
    this.dialogHost = el("div", "dialog-host");
    this.treeHost = el("div", "tree-view hidden");
    root.append(this.canvasHost, this.sidePanel, this.dialogHost, this.treeHost);

    this.stage.add(new THREE.AmbientLight(0xffffff, 0.7));
    const key = new THREE.DirectionalLight(0xffffff, 0.9);
    key.position.set(2, 3, 4);
    this.stage.add(key);
  }

  async init(): Promise<void> {
    this.renderer.setSize(960, 720);
    this.canvasHost.appendChild(this.renderer.domElement);
    this.positionCameraFromOrbit();
    this.bindPointerGestures();
    this.bindKeyboard();
    this.renderIntentForm();
    this.renderer.setAnimationLoop(() => this.renderer.render(this.stage, this.camera));
  }

  // -- camera ------------------------------------------------------------------

  private positionCameraFromOrbit(): void {
    const sinPhi = Math.sin(this.phi);
    this.camera.position.set(
      CAMERA_DISTANCE * sinPhi * Math.cos(this.theta),
      CAMERA_DISTANCE * Math.cos(this.phi),
      CAMERA_DISTANCE * sinPhi * Math.sin(this.theta),
    );
    this.camera.lookAt(0, 0, 0);
  }

  private viewDirection(): [number, number, number] {
    const direction = new THREE.Vector3();
    this.camera.getWorldDirection(direction);
    return [direction.x, direction.y, direction.z];
  }

  private animateSnap(face: Face): void {
    const normal = FACE_NORMALS[face];
    const from = this.camera.position.clone();
    const to = new THREE.Vector3(normal.x, normal.y, normal.z).multiplyScalar(
      CAMERA_DISTANCE,
    );
    const start = performance.now();
    const step = (): void => {
      const t = Math.min(1, (performance.now() - start) / 300);
      const eased = 1 - (1 - t) ** 3; // ease-out, settles with the controller lock
      this.camera.position.lerpVectors(from, to, eased);
      this.camera.lookAt(0, 0, 0);
      if (t < 1) requestAnimationFrame(step);
      else this.refreshScene();
    };
    requestAnimationFrame(step);
  }

  // -- pointer gestures ----------------------------------------------------------

  private pointerNdc(event: PointerEvent): THREE.Vector2 {
    const rect = this.renderer.domElement.getBoundingClientRect();
    return new THREE.Vector2(
      ((event.clientX - rect.left) / rect.width) * 2 - 1,
      -(((event.clientY - rect.top) / rect.height) * 2 - 1),
    );
  }

  private pickNode(event: PointerEvent): string | null {
    if (this.cubeScene === null) return null;
    this.raycaster.setFromCamera(this.pointerNdc(event), this.camera);
    const meshes = [...this.cubeScene.nodeMeshes.values()];
    const hit = this.raycaster.intersectObjects(meshes, false)[0];
    return hit === undefined ? null : (hit.object.userData["nodeId"] as string);
  }

  /** Map the pointer to face-plane (u, v) at the dragged node's depth. */
  private pointerOnFace(event: PointerEvent, drag: DragState): [number, number] | null {
    const plane = visibleAxes(drag.face);
    const normal = FACE_NORMALS[drag.face];
    const locked = getComponent(drag.ghost, plane.locked);
    const lockedSign = getComponent(normal, plane.locked);
    const dragPlane = new THREE.Plane(
      new THREE.Vector3(normal.x, normal.y, normal.z),
      -locked * lockedSign,
    );
    this.raycaster.setFromCamera(this.pointerNdc(event), this.camera);
    const point = new THREE.Vector3();
    if (this.raycaster.ray.intersectPlane(dragPlane, point) === null) {
      return null;
    }
    const at: Vec3 = { x: point.x, y: point.y, z: point.z };
    const u = plane.horizontalSign * getComponent(at, plane.horizontal);
    const v = plane.verticalSign * getComponent(at, plane.vertical);
    return [u, v];
  }

  private bindPointerGestures(): void {
    const canvas = this.renderer.domElement;

    canvas.addEventListener("pointerdown", (event) => {
      const nodeId = this.pickNode(event);
      if (nodeId !== null) {
        this.renderDashboard(nodeId);
      }
      if (
        nodeId !== null &&
        this.controller.snappedFace !== null &&
        !this.controller.isSnapAnimating() &&
        this.controller.dialog === null
      ) {
        const drag = this.controller.beginDrag(nodeId);
        this.showGhost(drag);
      } else {
        this.orbiting = true;
      }
      canvas.setPointerCapture(event.pointerId);
    });

    canvas.addEventListener("pointermove", (event) => {
      if (this.controller.drag !== null) {
        const uv = this.pointerOnFace(event, this.controller.drag);
        if (uv !== null) {
          const drag = this.controller.moveDrag(uv[0], uv[1]);
          this.updateGhost(drag);
        }
        return;
      }
      if (this.orbiting) {
        this.theta += event.movementX * 0.008;
        this.phi = Math.min(
          Math.PI - 0.15,
          Math.max(0.15, this.phi - event.movementY * 0.008),
        );
        this.positionCameraFromOrbit();
      }
    });

    canvas.addEventListener("pointerup", (event) => {
      canvas.releasePointerCapture(event.pointerId);
      if (this.controller.drag !== null) {
        this.hideGhost();
        void this.controller.endDrag().then((outcome) => {
          if (outcome.kind === "dialog") this.showDialog();
          else this.refreshAll();
        });
        return;
      }
      if (this.orbiting) {
        this.orbiting = false;
        void this.controller.endRotation(this.viewDirection()).then((face) => {
          this.animateSnap(face);
        });
      }
    });
  }

  private bindKeyboard(): void {
    window.addEventListener("keydown", (event) => {
      if (event.key !== "Escape") return;
      if (this.controller.drag !== null) {
        this.hideGhost();
        void this.controller.cancelDrag();
      } else if (this.controller.dialog !== null) {
        this.dialogHost.replaceChildren();
        void this.controller.cancelDialog();
      }
    });
  }

  // -- ghost -------------------------------------------------------------------

  private showGhost(drag: DragState): void {
    if (this.cubeScene === null) return;
    const source = this.controller.node(drag.nodeId).position;
    this.ghost = buildGhost(source, renderedRadius(source, drag.face));
    this.stage.add(this.ghost.group);
  }

  private updateGhost(drag: DragState): void {
    if (this.ghost === null || this.cubeScene === null) return;
    const source = this.controller.node(drag.nodeId).position;
    moveGhost(this.ghost, source, drag.ghost);
    setMergeHighlight(this.cubeScene, drag.mergeTargetId);
  }

  private hideGhost(): void {
    if (this.ghost !== null) {
      this.stage.remove(this.ghost.group);
      this.ghost = null;
    }
    if (this.cubeScene !== null) setMergeHighlight(this.cubeScene, null);
  }

  // -- panels ---------------------------------------------------------------------

  private renderIntentForm(): void {
    const form = el("div", "intent-form");
    const input = el("input") as HTMLInputElement;
    input.placeholder = "Describe the research intent";
    const go = el("button", "primary", "Map the trade-off space");
    go.addEventListener("click", () => {
      if (input.value.trim() === "") return;
      void this.controller.start(input.value).then(() => {
        form.remove();
        this.renderDimensionPanel();
      });
    });
    form.append(input, go);
    this.sidePanel.appendChild(form);
  }

  private renderDimensionPanel(): void {
    const state = this.controller.snapshot;
    if (state === null) return;
    const panel = el("div", "dimension-panel");
    panel.appendChild(el("h2", undefined, "Trade-off dimensions"));
    const picks = new Map<string, Axis>();

    const generate = el("button", "primary", "Generate ideas");
    generate.disabled = true;

    for (const pair of state.dimensions) {
      const row = el("div", "dimension-row");
      row.appendChild(
        el("span", "poles", `${pair.pole_a_name} ↔ ${pair.pole_b_name}`),
      );
      row.appendChild(el("small", "hint", pair.explanation));
      const slot = el("select") as HTMLSelectElement;
      for (const option of ["", "X", "Y", "Z"]) {
        const opt = el("option", undefined, option === "" ? "off" : option);
        opt.setAttribute("value", option);
        slot.appendChild(opt);
      }
      slot.addEventListener("change", () => {
        if (slot.value === "") picks.delete(pair.id);
        else picks.set(pair.id, slot.value as Axis);
        generate.disabled = picks.size !== 3;
      });
      row.appendChild(slot);
      panel.appendChild(row);
    }

    generate.addEventListener("click", () => {
      const assignments = [...picks.entries()].map(([pairId, axis]) => ({
        dimension_pair_id: pairId,
        axis,
      }));
      void this.controller
        .selectDimensions(assignments)
        .then(() => this.controller.generate())
        .then(() => this.refreshAll());
    });
    panel.appendChild(generate);
    panel.appendChild(this.renderAxisToggles());
    panel.appendChild(this.renderViewSwitch());
    this.sidePanel.appendChild(panel);
  }

  private renderAxisToggles(): HTMLElement {
    const box = el("div", "axis-toggles");
    for (const axis of ["X", "Y", "Z"] as Axis[]) {
      const label = el("label", undefined, ` ${axis}`);
      const check = el("input") as HTMLInputElement;
      check.type = "checkbox";
      check.checked = true;
      check.addEventListener("change", () => {
        void this.controller.toggleAxis(axis, check.checked).then(() => this.refreshAll());
      });
      label.prepend(check);
      box.appendChild(label);
    }
    return box;
  }

  private renderViewSwitch(): HTMLElement {
    const box = el("div", "view-switch");
    const cube = el("button", undefined, "Cube");
    const tree = el("button", undefined, "Tree");
    cube.addEventListener("click", () => {
      void this.controller.switchView("cube").then(() => {
        this.treeHost.classList.add("hidden");
        this.canvasHost.classList.remove("hidden");
      });
    });
    tree.addEventListener("click", () => {
      void this.controller.switchView("tree").then(() => this.renderTree());
    });
    box.append(cube, tree);
    return box;
  }

  private showDialog(): void {
    const dialog = this.controller.dialog;
    if (dialog === null) return;
    const box = el("div", "post-drag-dialog");
    box.appendChild(el("p", undefined, "Apply this move as:"));
    const iterate = el("button", "primary", "Iterate: evolve a new idea here");
    const correct = el("button", undefined, "Correct: rescore the idea in place");
    iterate.addEventListener("click", () => {
      box.remove();
      void this.controller.chooseDragOption("iterate").then(() => this.refreshAll());
    });
    correct.addEventListener("click", () => {
      box.remove();
      void this.controller.chooseDragOption("correct").then(() => this.refreshAll());
    });
    box.append(iterate, correct);
    this.dialogHost.appendChild(box);
    iterate.focus(); // the dialog defaults to iterate
  }

  private renderDashboard(nodeId: string): void {
    const state = this.controller.snapshot;
    if (state === null) return;
    const existing = this.sidePanel.querySelector(".dashboard");
    existing?.remove();
    const node = this.controller.node(nodeId);
    const box = el("div", "dashboard");
    box.appendChild(el("h3", undefined, node.title));
    for (const row of dashboardRows(node, state.dimensions, state.selected_dimensions)) {
      const line = el("div", "spectrum-row");
      line.appendChild(el("span", "pole pole-a", row.poleA));
      const bar = el("div", "spectrum-bar");
      const marker = el("div", "spectrum-marker");
      marker.style.left = `${row.fraction * 100}%`;
      bar.appendChild(marker);
      line.appendChild(bar);
      line.appendChild(el("span", "pole pole-b", row.poleB));
      line.appendChild(el("small", "leaning", row.label));
      box.appendChild(line);
    }
    this.sidePanel.appendChild(box);
  }

  private renderTree(): void {
    this.canvasHost.classList.add("hidden");
    this.treeHost.classList.remove("hidden");
    void (async () => {
      if (this.controller.sessionId === null) return;
      const tree = await this.apiClient.tree(this.controller.sessionId);
      const layout = layoutTree(tree);
      const svg = document.createElementNS(SVG_NS, "svg");
      svg.setAttribute("viewBox", `-120 ${-layout.height / 2 - 60} ${layout.width + 240} ${layout.height + 120}`);
      for (const edge of layout.edges) {
        const line = document.createElementNS(SVG_NS, "line");
        line.setAttribute("x1", String(edge.from.x));
        line.setAttribute("y1", String(edge.from.y));
        line.setAttribute("x2", String(edge.to.x));
        line.setAttribute("y2", String(edge.to.y));
        line.setAttribute("class", `edge edge-${edge.kind}`);
        svg.appendChild(line);
      }
      for (const node of layout.nodes) {
        const dot = document.createElementNS(SVG_NS, "circle");
        dot.setAttribute("cx", String(node.x));
        dot.setAttribute("cy", String(node.y));
        dot.setAttribute("r", "14");
        dot.setAttribute("class", `tree-node origin-${node.origin}`);
        svg.appendChild(dot);
        const text = document.createElementNS(SVG_NS, "text");
        text.setAttribute("x", String(node.x));
        text.setAttribute("y", String(node.y + 30));
        text.setAttribute("text-anchor", "middle");
        text.textContent = node.title;
        svg.appendChild(text);
      }
      this.treeHost.replaceChildren(svg);
    })();
  }

  // -- scene refresh ----------------------------------------------------------------

  private refreshScene(): void {
    const state = this.controller.snapshot;
    if (state === null) return;
    if (this.cubeScene !== null) {
      this.stage.remove(this.cubeScene.group);
    }
    this.cubeScene = buildCubeScene(state.nodes, state.dimensions, {
      face: this.controller.snappedFace,
    });
    this.stage.add(this.cubeScene.group);
  }

  private refreshAll(): void {
    this.refreshScene();
    const state = this.controller.snapshot;
    if (state !== null && this.cubeScene !== null) {
      updateCubeScene(this.cubeScene, state.nodes, {
        face: this.controller.snappedFace,
      });
    }
  }
}

export function mountCubeApp(root: HTMLElement, baseUrl: string): Promise<void> {
  const app = new CubeApp(root, baseUrl);
  return app.init();
}

// auto-mount when loaded as the page's module entry
const autoRoot = typeof document !== "undefined" ? document.getElementById("app") : null;
if (autoRoot !== null) {
  void mountCubeApp(autoRoot, autoRoot.dataset["server"] ?? "http://127.0.0.1:8000");
}
