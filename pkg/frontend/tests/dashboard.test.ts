/**
 * Dashboard spectrum-row tests: fractions, leaning, and the rule that no
 * label ever shows a bare signed number.
 */

import { describe, expect, it } from "vitest";

import { dashboardRows } from "../src/dashboard.js";
import type {
  DimensionPairView,
  NodeView,
  SelectedDimensionView,
} from "../src/types.js";

function pairView(id: string, poleA: string, poleB: string): DimensionPairView {
  return {
    id,
    pole_a_name: poleA,
    pole_a_description: "",
    pole_b_name: poleB,
    pole_b_description: "",
    explanation: "",
    axis: null,
    enabled: true,
  };
}

function nodeWith(entries: Record<string, { score: number; reasoning: string }>): NodeView {
  return {
    id: "n",
    name: "n",
    title: "Idea",
    problem: "",
    scores: { entries },
    parents: [],
    origin: "seed",
    created_at: 0,
    position: { x: 0, y: 0, z: 0 },
    display_size: 1,
  };
}

const DIMENSIONS = [
  pairView("cm", "Cloud", "Edge"),
  pairView("dp", "Privacy", "Utility"),
  pairView("ic", "Individual", "Population"),
];

const SELECTED: SelectedDimensionView[] = [
  { dimension_pair_id: "cm", axis: "X" },
  { dimension_pair_id: "dp", axis: "Y" },
  { dimension_pair_id: "ic", axis: "Z" },
];

describe("dashboardRows", () => {
  it("maps scores onto the pole-to-pole spectrum", () => {
    const node = nodeWith({
      cm: { score: -40, reasoning: "runs on the device" },
      dp: { score: 15, reasoning: "" },
      ic: { score: 0, reasoning: "" },
    });
    const rows = dashboardRows(node, DIMENSIONS, SELECTED);
    expect(rows).toHaveLength(3);

    expect(rows[0]).toMatchObject({
      pairId: "cm",
      fraction: 0.1,
      leaning: "pole_a",
      label: "90% toward Cloud",
      reasoning: "runs on the device",
    });
    expect(rows[1]).toMatchObject({
      pairId: "dp",
      fraction: 0.65,
      leaning: "pole_b",
      label: "65% toward Utility",
    });
    expect(rows[2]).toMatchObject({
      pairId: "ic",
      fraction: 0.5,
      leaning: "balanced",
      label: "balanced between Individual and Population",
    });
  });

  it("pins the extremes to the ends of the bar", () => {
    const node = nodeWith({
      cm: { score: -50, reasoning: "" },
      dp: { score: 50, reasoning: "" },
    });
    const rows = dashboardRows(node, DIMENSIONS, SELECTED);
    expect(rows[0]?.fraction).toBe(0);
    expect(rows[0]?.label).toBe("100% toward Cloud");
    expect(rows[1]?.fraction).toBe(1);
    expect(rows[1]?.label).toBe("100% toward Utility");
  });

  it("never prints a signed number", () => {
    for (const score of [-50, -42, -15, 0, 1, 22, 50]) {
      const node = nodeWith({ cm: { score, reasoning: "" } });
      const rows = dashboardRows(node, DIMENSIONS, SELECTED);
      expect(rows[0]?.label).not.toMatch(/[+-]\d/);
      expect(rows[0]?.label).not.toMatch(/\bminus\b/i);
    }
  });

  it("follows selection order and skips dimensions without a score", () => {
    const node = nodeWith({
      ic: { score: 10, reasoning: "" },
      cm: { score: -10, reasoning: "" },
    });
    const rows = dashboardRows(node, DIMENSIONS, SELECTED);
    expect(rows.map((r) => r.pairId)).toStrictEqual(["cm", "ic"]);
  });
});
