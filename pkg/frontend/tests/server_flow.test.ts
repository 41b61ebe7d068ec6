/**
 * Scripted end-to-end walkthrough against a real server process running
 * the deterministic offline provider.
 *
 * The script drives the same controller the browser shell binds, through
 * both canonical gestures:
 *
 *   rotate -> snap -> drag -> dialog -> iterate   (steer to a new idea)
 *   rotate -> drag onto a node -> merge           (combine two ideas)
 *
 * and then touches every remaining interaction so the session log ends up
 * containing every event kind. Node titles, scores, parent links, and the
 * provenance tree are asserted against the walkthrough's canonical values,
 * so any drift in the drag-to-score conversion or in server bookkeeping
 * fails loudly here.
 */

import { spawn } from "node:child_process";
import type { ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { CubeController } from "../src/controller.js";
import { positionToScores } from "../src/geometry.js";
import type { Scores } from "../src/geometry.js";
import { incomingEdges } from "../src/tree.js";
import {
  EVENT_KINDS,
  type IdeaDraftView,
  type NodeView,
  type SessionState,
  type TreeView,
} from "../src/types.js";

const REPO_ROOT = join(__dirname, "..", "..");
const INTENT =
  "Use wearable data to train a multi-agent system for health prediction";

const TITLES = {
  privacy: "Ethical Privacy Framework",
  sensing: "Real-Time Sensing Integration",
  modeling: "Agent-Based Modeling",
  steered: "ML Real-Time Processing",
  merged: "Adaptive ML Real-Time Health",
} as const;

let proc: ChildProcess;
let stderrLog = "";
let dataDir: string;
let api: ApiClient;
let controller: CubeController;

// pair ids resolved from the server's candidate list
let cm: string; // Complex Models vs Simple Models
let dp: string; // Data Privacy vs Data Utilization
let ic: string; // Individual-Centric vs Population-Centric

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

async function waitForServer(client: ApiClient): Promise<void> {
  const deadline = Date.now() + 30_000;
  for (;;) {
    if (proc.exitCode !== null) {
      throw new Error(`server exited early (code ${proc.exitCode}):\n${stderrLog}`);
    }
    try {
      await client.state("s-nope");
      throw new Error("state for a bogus session should have failed");
    } catch (error) {
      if (error instanceof ApiError) {
        // the server is answering; the probe doubles as an error-shape check
        expect(error.status).toBe(404);
        expect(error.code).toBe("not_found");
        return;
      }
      if (Date.now() > deadline) {
        throw new Error(`server did not come up:\n${stderrLog}`, { cause: error });
      }
      await sleep(150);
    }
  }
}

function findByTitle(state: SessionState, title: string): NodeView {
  const node = state.nodes.find((n) => n.title === title);
  if (node === undefined) {
    throw new Error(`no node titled '${title}'`);
  }
  return node;
}

function scoresOf(node: NodeView): Scores {
  return Object.fromEntries(
    Object.entries(node.scores.entries).map(([pairId, entry]) => [pairId, entry.score]),
  );
}

function snapshot(): SessionState {
  if (controller.snapshot === null) {
    throw new Error("controller has no snapshot yet");
  }
  return controller.snapshot;
}

// The controller runs on the real clock here: the server stamps its own
// events with wall time, so a simulated clock that runs ahead of it would
// poison the shared event log. Snap settling is therefore really waited out.
async function settleSnap(view: readonly [number, number, number]): Promise<void> {
  await controller.endRotation(view);
  await sleep(310);
}

beforeAll(async () => {
  dataDir = mkdtempSync(join(tmpdir(), "cube-ui-flow-"));
  const port = 18_000 + Math.floor(Math.random() * 2_000);
  proc = spawn(
    "python3",
    [
      "-m",
      "tradespace",
      "serve",
      "--provider",
      "stub",
      "--host",
      "127.0.0.1",
      "--port",
      String(port),
      "--data-dir",
      dataDir,
    ],
    { cwd: REPO_ROOT, stdio: ["ignore", "ignore", "pipe"] },
  );
  proc.stderr?.on("data", (chunk: Buffer) => {
    stderrLog += chunk.toString();
  });

  api = new ApiClient(`http://127.0.0.1:${port}`);
  await waitForServer(api);
  controller = new CubeController(api);
});

afterAll(async () => {
  if (proc !== undefined && proc.exitCode === null) {
    const exited = new Promise((resolve) => proc.once("exit", resolve));
    proc.kill("SIGTERM");
    await exited;
  }
  if (dataDir !== undefined) {
    rmSync(dataDir, { recursive: true, force: true });
  }
});

describe("scripted walkthrough", () => {
  it("creates a session and picks the three canonical dimensions", async () => {
    const created = await controller.start(INTENT);
    expect(created.session_id).toMatch(/\S/);
    const byPoleA = new Map(
      created.dimension_candidates.map((pair) => [pair.pole_a_name, pair.id]),
    );
    expect(created.dimension_candidates.length).toBeGreaterThanOrEqual(3);
    cm = byPoleA.get("Complex Models")!;
    dp = byPoleA.get("Data Privacy")!;
    ic = byPoleA.get("Individual-Centric")!;
    expect(cm).toBeDefined();
    expect(dp).toBeDefined();
    expect(ic).toBeDefined();

    await controller.selectDimensions([
      { dimension_pair_id: cm, axis: "X" },
      { dimension_pair_id: dp, axis: "Y" },
      { dimension_pair_id: ic, axis: "Z" },
    ]);
    expect(snapshot().selected_dimensions.map((s) => s.axis)).toStrictEqual([
      "X",
      "Y",
      "Z",
    ]);
  });

  it("streams three seed ideas with their scores", async () => {
    const drafts: IdeaDraftView[] = [];
    const scored: string[] = [];
    const outcome = await controller.generate({
      onDraft: (_index, draft) => drafts.push(draft),
      onScored: (node) => scored.push(node.title),
    });
    expect(outcome.partial).toBe(false);
    expect(outcome.errors).toStrictEqual([]);
    expect(drafts.map((d) => d.title)).toStrictEqual([
      TITLES.privacy,
      TITLES.sensing,
      TITLES.modeling,
    ]);
    expect(scored.sort()).toStrictEqual(
      [TITLES.privacy, TITLES.sensing, TITLES.modeling].sort(),
    );

    const state = snapshot();
    expect(state.nodes).toHaveLength(3);
    expect(scoresOf(findByTitle(state, TITLES.privacy))).toStrictEqual({
      [cm]: -15,
      [dp]: -35,
      [ic]: -40,
    });
    expect(scoresOf(findByTitle(state, TITLES.sensing))).toStrictEqual({
      [cm]: 15,
      [dp]: 20,
      [ic]: 0,
    });
    expect(scoresOf(findByTitle(state, TITLES.modeling))).toStrictEqual({
      [cm]: -42,
      [dp]: -5,
      [ic]: 10,
    });
  });

  it("rotate -> snap -> drag -> dialog -> iterate steers a new idea", async () => {
    const face = await controller.endRotation([0, 0, -1]);
    expect(face).toBe("PosZ");
    expect(controller.isSnapAnimating()).toBe(true);
    await sleep(310);
    expect(controller.isSnapAnimating()).toBe(false);

    const modeling = findByTitle(snapshot(), TITLES.modeling);
    expect(modeling.position).toStrictEqual({ x: -0.84, y: -0.1, z: 0.2 });

    controller.beginDrag(modeling.id);
    const drag = controller.moveDrag(0.6, 0.44);
    expect(drag.ghost).toStrictEqual({ x: 0.6, y: 0.44, z: 0.2 });
    expect(drag.mergeTargetId).toBeNull();
    const ghost = { ...drag.ghost };

    const outcome = await controller.endDrag();
    expect(outcome.kind).toBe("dialog");
    if (outcome.kind !== "dialog") return;
    expect(outcome.dialog.defaultChoice).toBe("iterate");
    // the ghost converts back to exactly the scores the dialog carries
    expect(outcome.dialog.targetScores).toStrictEqual({
      [cm]: 30,
      [dp]: 22,
      [ic]: 10,
    });
    expect(positionToScores(ghost, { X: cm, Y: dp, Z: ic })).toStrictEqual(
      outcome.dialog.targetScores,
    );

    const chosen = await controller.chooseDragOption("iterate");
    expect(chosen.kind).toBe("steered");
    if (chosen.kind !== "steered") return;
    expect(chosen.node.title).toBe(TITLES.steered);
    expect(scoresOf(chosen.node)).toStrictEqual({ [cm]: 30, [dp]: 22, [ic]: 10 });
    expect(chosen.node.parents).toStrictEqual([
      { node_or_fragment_id: modeling.id, edge_kind: "steered" },
    ]);
  });

  it("rotate -> drag onto a node -> merge combines two ideas", async () => {
    const face = await controller.endRotation([0, -1, 0]);
    expect(face).toBe("PosY");
    await sleep(310);

    const state = snapshot();
    const steered = findByTitle(state, TITLES.steered);
    const sensing = findByTitle(state, TITLES.sensing);
    expect(steered.position).toStrictEqual({ x: 0.6, y: 0.44, z: 0.2 });
    expect(sensing.position).toStrictEqual({ x: 0.3, y: 0.4, z: 0 });

    controller.beginDrag(steered.id);
    // PosY shows X horizontally and Z vertically; Y stays locked at 0.44,
    // leaving 0.04 of locked-axis distance to the sensing idea at 0.4
    const drag = controller.moveDrag(0.3, 0.0);
    expect(drag.ghost).toStrictEqual({ x: 0.3, y: 0.44, z: 0 });
    expect(drag.mergeTargetId).toBe(sensing.id);

    const outcome = await controller.endDrag();
    expect(outcome.kind).toBe("merged");
    if (outcome.kind !== "merged") return;
    expect(outcome.node.title).toBe(TITLES.merged);
    expect(scoresOf(outcome.node)).toStrictEqual({ [cm]: 18, [dp]: 22, [ic]: -5 });
    expect(outcome.node.parents).toStrictEqual([
      { node_or_fragment_id: steered.id, edge_kind: "merged" },
      { node_or_fragment_id: sensing.id, edge_kind: "merged" },
    ]);
    expect(controller.dialog).toBeNull();
  });

  it("matches the canonical five-idea state and provenance tree", async () => {
    const state = await api.state(controller.sessionId!);
    expect(state.nodes).toHaveLength(5);
    const expected: Array<[string, Scores]> = [
      [TITLES.privacy, { [cm]: -15, [dp]: -35, [ic]: -40 }],
      [TITLES.sensing, { [cm]: 15, [dp]: 20, [ic]: 0 }],
      [TITLES.modeling, { [cm]: -42, [dp]: -5, [ic]: 10 }],
      [TITLES.steered, { [cm]: 30, [dp]: 22, [ic]: 10 }],
      [TITLES.merged, { [cm]: 18, [dp]: 22, [ic]: -5 }],
    ];
    for (const [title, scores] of expected) {
      expect(scoresOf(findByTitle(state, title))).toStrictEqual(scores);
    }

    const tree: TreeView = await api.tree(controller.sessionId!);
    expect(tree.nodes).toHaveLength(6); // intent root plus five ideas
    expect(tree.depth).toBe(3);
    const root = tree.nodes.find((n) => n.depth === 0);
    expect(root?.origin).toBe("intent");
    const merged = findByTitle(state, TITLES.merged);
    const parents = incomingEdges(tree, merged.id);
    expect(parents).toHaveLength(2);
    expect(parents.every((e) => e.kind === "merged")).toBe(true);
    expect(tree.edges.filter((e) => e.kind === "seed")).toHaveLength(3);
  });

  it("logs a cancelled drag without mutating anything", async () => {
    await settleSnap([0, 0, -1]);
    const before = (await api.state(controller.sessionId!)).nodes.length;
    const privacy = findByTitle(snapshot(), TITLES.privacy);
    controller.beginDrag(privacy.id);
    controller.moveDrag(0.1, 0.1);
    await controller.cancelDrag();

    const after = await api.state(controller.sessionId!);
    expect(after.nodes).toHaveLength(before);
    const dragEnds = after.events.filter((e) => e.kind === "drag_end");
    expect(dragEnds.some((e) => e.payload["cancelled"] === true)).toBe(true);
  });

  it("captures a fragment verbatim and grows a new idea from it", async () => {
    const privacy = findByTitle(snapshot(), TITLES.privacy);
    const highlighted = "federated on-device training";
    expect(privacy.problem).toContain(highlighted);

    const fragment = await controller.createFragment(privacy.id, highlighted);
    expect(fragment.text).toBe(highlighted);
    expect(fragment.source_idea_id).toBe(privacy.id);

    const merged = findByTitle(snapshot(), TITLES.merged);
    const grown = await controller.applyFragment(fragment.id, merged.id);
    expect(grown.origin).toBe("fragment");
    expect(grown.parents).toStrictEqual([
      { node_or_fragment_id: merged.id, edge_kind: "fragment" },
      { node_or_fragment_id: fragment.id, edge_kind: "fragment" },
    ]);
  });

  it("collapses and restores an axis", async () => {
    await controller.toggleAxis("Z", false);
    let state = snapshot();
    expect(state.dimensions.find((p) => p.id === ic)?.enabled).toBe(false);
    expect(state.nodes.every((n) => n.position.z === 0)).toBe(true);

    await controller.toggleAxis("Z", true);
    state = snapshot();
    expect(state.dimensions.find((p) => p.id === ic)?.enabled).toBe(true);
    expect(findByTitle(state, TITLES.privacy).position.z).toBe(-0.8);
  });

  it("corrects a single score by dragging without spawning a node", async () => {
    const before = await api.state(controller.sessionId!);
    const privacy = findByTitle(before, TITLES.privacy);
    expect(privacy.position).toStrictEqual({ x: -0.3, y: -0.7, z: -0.8 });

    controller.beginDrag(privacy.id);
    // vertical drop matches the stored score, so only the horizontal
    // dimension actually changes and the request carries just that one
    controller.moveDrag(-0.2, -0.7);
    const outcome = await controller.endDrag();
    expect(outcome.kind).toBe("dialog");
    const chosen = await controller.chooseDragOption("correct");
    expect(chosen.kind).toBe("corrected");
    if (chosen.kind !== "corrected") return;
    expect(chosen.corrections).toStrictEqual([
      expect.objectContaining({
        node_id: privacy.id,
        dimension_pair_id: cm,
        old_score: -15,
        new_score: -10,
      }),
    ]);

    const after = await api.state(controller.sessionId!);
    expect(after.nodes).toHaveLength(before.nodes.length);
    expect(after.corrections).toHaveLength(1);
    expect(scoresOf(findByTitle(after, TITLES.privacy))[cm]).toBe(-10);
  });

  it("ends with every event kind in the session log", async () => {
    await controller.switchView("tree");

    const state = await api.state(controller.sessionId!);
    const present = new Set(state.events.map((e) => e.kind));
    for (const kind of EVENT_KINDS) {
      expect(present, `missing event kind ${kind}`).toContain(kind);
    }
    // the log is the replay record: timestamps never run backward
    const stamps = state.events.map((e) => e.timestamp);
    for (let i = 1; i < stamps.length; i += 1) {
      expect(stamps[i]!).toBeGreaterThanOrEqual(stamps[i - 1]!);
    }
    expect(state.events.every((e) => e.source === "server" || e.source === "client")).toBe(
      true,
    );
  });
});
