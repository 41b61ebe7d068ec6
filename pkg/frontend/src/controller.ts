/**
 * Interaction controller for the evaluation cube.
 *
 * Holds the client view state (camera face, active view, drag in
 * progress) and turns completed gestures into API calls. Rendering layers
 * subscribe to the authoritative snapshot; the ghost node is the only
 * optimistic piece of state, and it never outlives its gesture.
 *
 * Contract highlights:
 *  - a drag only starts on a snapped face, and never while the snap
 *    animation is still running;
 *  - releasing a drag either sends a merge (when a target is within the
 *    merge threshold) or opens the two-option dialog; Escape cancels with
 *    no mutation, though the drag events are still logged;
 *  - each completed gesture flushes exactly one client event batch, and
 *    the batch always reaches the server before the mutation it precedes;
 *  - event timestamps are floored to the newest timestamp this client has
 *    seen, so a skewed local clock cannot produce an out-of-order batch;
 *  - at most one mutation request is in flight at a time.
 */

import {
  componentToScore,
  detectMergeTarget,
  snapToFace,
  visibleAxes,
} from "./geometry.js";
import type { Axis, AxisAssignment, Face, Scores, Vec3 } from "./geometry.js";
import { newRequestToken } from "./api.js";
import type { SessionApi } from "./api.js";
import type {
  AssignmentBody,
  ClientEvent,
  CorrectionResult,
  CorrectionView,
  CreateSessionResult,
  EventKind,
  FragmentView,
  GenerateHandlers,
  GenerateOutcome,
  NodeResult,
  NodeView,
  SessionState,
} from "./types.js";

export class StateError extends Error {
  override name = "StateError";
}

export type ActiveView = "cube" | "tree";

export interface DragState {
  nodeId: string;
  face: Face;
  ghost: Vec3;
  mergeTargetId: string | null;
}

export interface PostDragDialog {
  nodeId: string;
  /** Full target vector: every stored pair, visible axes overridden. */
  targetScores: Scores;
  /** The dialog opens with this option focused. */
  defaultChoice: "iterate";
}

export type DragOutcome =
  | { kind: "merged"; node: NodeView }
  | { kind: "dialog"; dialog: PostDragDialog };

export type SteerOutcome =
  | { kind: "steered"; node: NodeView }
  | { kind: "corrected"; node: NodeView; corrections: CorrectionView[] }
  | { kind: "no_change" };

export interface ControllerOptions {
  /** Millisecond clock; injectable so tests control the snap animation. */
  now?: () => number;
  mergeThreshold?: number;
  snapDurationMs?: number;
}

function clamp01(value: number): number {
  return Math.max(-1, Math.min(1, value));
}

function getComponent(p: Vec3, axis: Axis): number {
  return axis === "X" ? p.x : axis === "Y" ? p.y : p.z;
}

function setComponent(p: Vec3, axis: Axis, value: number): void {
  if (axis === "X") p.x = value;
  else if (axis === "Y") p.y = value;
  else p.z = value;
}

export class CubeController {
  private readonly now: () => number;
  private readonly mergeThreshold: number;
  private readonly snapDurationMs: number;

  sessionId: string | null = null;
  snapshot: SessionState | null = null;
  activeView: ActiveView = "cube";
  snappedFace: Face | null = null;
  drag: DragState | null = null;
  dialog: PostDragDialog | null = null;

  private snapEndsAt = 0;
  private queued: ClientEvent[] = [];
  private lastEventTimestamp = -Infinity;
  private busy = false;

  constructor(
    private readonly api: SessionApi,
    options: ControllerOptions = {},
  ) {
    this.now = options.now ?? (() => Date.now());
    this.mergeThreshold = options.mergeThreshold ?? 0.15;
    this.snapDurationMs = options.snapDurationMs ?? 300;
  }

  // -- snapshot access -------------------------------------------------------

  private get state(): SessionState {
    if (this.snapshot === null) {
      throw new StateError("no session yet");
    }
    return this.snapshot;
  }

  node(nodeId: string): NodeView {
    const found = this.state.nodes.find((n) => n.id === nodeId);
    if (found === undefined) {
      throw new StateError(`unknown node '${nodeId}'`);
    }
    return found;
  }

  /** Axis assignment of the currently enabled dimensions. */
  enabledAxes(): AxisAssignment {
    const axes: AxisAssignment = {};
    for (const pair of this.state.dimensions) {
      if (pair.axis !== null && pair.enabled) {
        axes[pair.axis] = pair.id;
      }
    }
    return axes;
  }

  private storedScores(node: NodeView): Scores {
    const scores: Scores = {};
    for (const [pairId, entry] of Object.entries(node.scores.entries)) {
      scores[pairId] = entry.score;
    }
    return scores;
  }

  isSnapAnimating(): boolean {
    return this.now() < this.snapEndsAt;
  }

  // -- event log -------------------------------------------------------------

  private mint(kind: EventKind, payload: Record<string, unknown>): void {
    // Floor to the newest timestamp seen; the server rejects regressions.
    const timestamp = Math.max(this.now() / 1000, this.lastEventTimestamp);
    this.lastEventTimestamp = timestamp;
    this.queued.push({ kind, payload, timestamp });
  }

  /** Post the queued gesture batch, if any. Restores the queue on failure. */
  private async flushEvents(): Promise<void> {
    if (this.queued.length === 0 || this.sessionId === null) {
      return;
    }
    const batch = this.queued;
    this.queued = [];
    try {
      await this.api.postEvents(this.sessionId, batch);
    } catch (error) {
      this.queued = batch.concat(this.queued);
      throw error;
    }
  }

  private async refresh(): Promise<SessionState> {
    if (this.sessionId === null) {
      throw new StateError("no session yet");
    }
    const snapshot = await this.api.state(this.sessionId);
    this.snapshot = snapshot;
    const last = snapshot.events[snapshot.events.length - 1];
    if (last !== undefined) {
      this.lastEventTimestamp = Math.max(this.lastEventTimestamp, last.timestamp);
    }
    return snapshot;
  }

  private async mutate<T>(work: () => Promise<T>): Promise<T> {
    if (this.busy) {
      throw new StateError("another request is in flight");
    }
    this.busy = true;
    try {
      return await work();
    } finally {
      this.busy = false;
    }
  }

  // -- session lifecycle -------------------------------------------------------

  async start(intent: string): Promise<CreateSessionResult> {
    if (this.sessionId !== null) {
      throw new StateError("controller already has a session");
    }
    return this.mutate(async () => {
      const result = await this.api.createSession(intent);
      this.sessionId = result.session_id;
      await this.refresh();
      return result;
    });
  }

  async selectDimensions(assignments: AssignmentBody[]): Promise<SessionState> {
    return this.mutate(async () => {
      await this.api.selectDimensions(this.requireSession(), assignments);
      return this.refresh();
    });
  }

  async generate(
    handlers?: GenerateHandlers,
    relatedWorks?: string,
  ): Promise<GenerateOutcome> {
    return this.mutate(async () => {
      await this.flushEvents();
      const outcome = await this.api.generate(
        this.requireSession(),
        handlers,
        relatedWorks,
      );
      await this.refresh();
      return outcome;
    });
  }

  async toggleAxis(axis: Axis, enabled: boolean): Promise<SessionState> {
    return this.mutate(async () => {
      await this.flushEvents();
      await this.api.toggleAxis(this.requireSession(), axis, enabled);
      return this.refresh();
    });
  }

  async createFragment(sourceIdeaId: string, text: string): Promise<FragmentView> {
    return this.mutate(async () => {
      await this.flushEvents();
      const result = await this.api.createFragment(
        this.requireSession(),
        sourceIdeaId,
        text,
        newRequestToken(),
      );
      await this.refresh();
      return result.fragment;
    });
  }

  async applyFragment(fragmentId: string, targetNodeId: string): Promise<NodeView> {
    return this.mutate(async () => {
      await this.flushEvents();
      const result = await this.api.applyFragment(
        this.requireSession(),
        fragmentId,
        targetNodeId,
        newRequestToken(),
      );
      await this.refresh();
      return result.node;
    });
  }

  private requireSession(): string {
    if (this.sessionId === null) {
      throw new StateError("no session yet");
    }
    return this.sessionId;
  }

  // -- rotation ---------------------------------------------------------------

  /**
   * A rotation gesture ended with the camera looking along `view`. Snaps
   * to the nearest face, starts the settle animation, and logs the
   * rotation. Drags are refused until the animation completes.
   */
  async endRotation(view: readonly [number, number, number]): Promise<Face> {
    if (this.drag !== null) {
      throw new StateError("cannot rotate during a drag");
    }
    const face = snapToFace(view);
    this.snappedFace = face;
    this.snapEndsAt = this.now() + this.snapDurationMs;
    this.mint("rotation", { face, view: [view[0], view[1], view[2]] });
    await this.flushEvents();
    return face;
  }

  async switchView(view: ActiveView): Promise<void> {
    if (view === this.activeView) {
      return;
    }
    this.mint("view_change", { from: this.activeView, to: view });
    this.activeView = view;
    await this.flushEvents();
  }

  // -- dragging ----------------------------------------------------------------

  beginDrag(nodeId: string): DragState {
    if (this.snappedFace === null) {
      throw new StateError("drag requires a snapped face");
    }
    if (this.isSnapAnimating()) {
      throw new StateError("view is still snapping");
    }
    if (this.drag !== null) {
      throw new StateError("a drag is already in progress");
    }
    if (this.dialog !== null) {
      throw new StateError("resolve the post-drag dialog first");
    }
    const node = this.node(nodeId);
    this.drag = {
      nodeId,
      face: this.snappedFace,
      ghost: { ...node.position },
      mergeTargetId: null,
    };
    this.mint("drag_start", { node_id: nodeId, face: this.snappedFace });
    return this.drag;
  }

  /**
   * Pointer moved to screen point (u, v) on the face plane, both in
   * [-1, +1]. Updates the ghost and the highlighted merge candidate. The
   * ghost moves only along the visible enabled axes; the locked axis keeps
   * the node's stored depth, so converting the ghost back to scores agrees
   * with the drag projection exactly.
   */
  moveDrag(u: number, v: number): DragState {
    const drag = this.requireDrag();
    if (!(Number.isFinite(u) && Number.isFinite(v))) {
      throw new StateError("drag coordinates must be finite");
    }
    const plane = visibleAxes(drag.face);
    const axes = this.enabledAxes();
    const moves: Array<[Axis, number, number]> = [
      [plane.horizontal, plane.horizontalSign, clamp01(u)],
      [plane.vertical, plane.verticalSign, clamp01(v)],
    ];
    for (const [axis, sign, coord] of moves) {
      if (axes[axis] !== undefined) {
        setComponent(drag.ghost, axis, sign * coord);
      }
    }
    drag.mergeTargetId = detectMergeTarget(
      drag.nodeId,
      drag.ghost,
      this.state.nodes.map((n) => ({ id: n.id, position: n.position })),
      axes,
      this.mergeThreshold,
    );
    return drag;
  }

  /** Escape pressed mid-drag: log the gesture, send no mutation. */
  async cancelDrag(): Promise<void> {
    const drag = this.requireDrag();
    this.mint("drag_end", {
      node_id: drag.nodeId,
      cancelled: true,
      ghost: { ...drag.ghost },
    });
    this.drag = null;
    await this.flushEvents();
  }

  /**
   * Drag released. Within merge range this sends the merge immediately;
   * otherwise it opens the iterate/correct dialog and the mutation waits
   * for `chooseDragOption`.
   */
  async endDrag(): Promise<DragOutcome> {
    const drag = this.requireDrag();
    this.mint("drag_end", {
      node_id: drag.nodeId,
      cancelled: false,
      ghost: { ...drag.ghost },
      merge_target: drag.mergeTargetId,
    });
    this.drag = null;

    if (drag.mergeTargetId !== null) {
      const targetId = drag.mergeTargetId;
      return this.mutate(async () => {
        await this.flushEvents();
        const result = await this.api.merge(
          this.requireSession(),
          drag.nodeId,
          targetId,
          newRequestToken(),
        );
        await this.refresh();
        return { kind: "merged", node: result.node };
      });
    }

    const node = this.node(drag.nodeId);
    const axes = this.enabledAxes();
    const target = this.storedScores(node);
    const plane = visibleAxes(drag.face);
    for (const axis of [plane.horizontal, plane.vertical]) {
      const pairId = axes[axis];
      if (pairId !== undefined) {
        target[pairId] = componentToScore(getComponent(drag.ghost, axis));
      }
    }
    this.dialog = {
      nodeId: drag.nodeId,
      targetScores: target,
      defaultChoice: "iterate",
    };
    return { kind: "dialog", dialog: this.dialog };
  }

  /** Dialog resolved. Iterate steers to a new node; correct rescores in place. */
  async chooseDragOption(choice: "iterate" | "correct"): Promise<SteerOutcome> {
    const dialog = this.requireDialog();
    this.dialog = null;
    this.mint("post_drag_choice", { node_id: dialog.nodeId, choice });

    return this.mutate(async () => {
      await this.flushEvents();
      if (choice === "iterate") {
        const result = (await this.api.steer(
          this.requireSession(),
          dialog.nodeId,
          "iterate",
          dialog.targetScores,
          newRequestToken(),
        )) as NodeResult;
        await this.refresh();
        return { kind: "steered", node: result.node };
      }

      const stored = this.storedScores(this.node(dialog.nodeId));
      const changed: Scores = {};
      for (const [pairId, score] of Object.entries(dialog.targetScores)) {
        if (stored[pairId] !== score) {
          changed[pairId] = score;
        }
      }
      if (Object.keys(changed).length === 0) {
        return { kind: "no_change" };
      }
      const result = (await this.api.steer(
        this.requireSession(),
        dialog.nodeId,
        "correct",
        changed,
        newRequestToken(),
      )) as CorrectionResult;
      await this.refresh();
      return { kind: "corrected", node: result.node, corrections: result.corrections };
    });
  }

  /** Dialog dismissed without a choice; the drag events still flush. */
  async cancelDialog(): Promise<void> {
    this.requireDialog();
    this.dialog = null;
    await this.flushEvents();
  }

  private requireDrag(): DragState {
    if (this.drag === null) {
      throw new StateError("no drag in progress");
    }
    return this.drag;
  }

  private requireDialog(): PostDragDialog {
    if (this.dialog === null) {
      throw new StateError("no dialog open");
    }
    return this.dialog;
  }
}
