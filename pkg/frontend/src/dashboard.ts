/**
 * Score dashboard rows.
 *
 * Scores live on a symmetric [-50, +50] scale internally, but signed
 * numbers invite misreading: "-40 on Individual-Centric vs
 * Population-Centric" does not say which pole the idea leans toward.
 * The dashboard therefore renders each score as a position on the
 * spectrum between the two pole names, with an explicit directional
 * phrase, and never shows a bare signed integer.
 */

import { SCORE_MAX } from "./geometry.js";
import type { DimensionPairView, NodeView, SelectedDimensionView } from "./types.js";

export type Leaning = "pole_a" | "pole_b" | "balanced";

export interface SpectrumRow {
  pairId: string;
  poleA: string;
  poleB: string;
  /** 0 = fully pole A, 1 = fully pole B, 0.5 = balanced. */
  fraction: number;
  leaning: Leaning;
  /** Directional phrase, e.g. "80% toward Data Privacy". */
  label: string;
  reasoning: string;
}

function rowFor(pair: DimensionPairView, score: number, reasoning: string): SpectrumRow {
  const fraction = (score + SCORE_MAX) / (2 * SCORE_MAX);
  let leaning: Leaning;
  let label: string;
  if (score < 0) {
    leaning = "pole_a";
    label = `${Math.round((1 - fraction) * 100)}% toward ${pair.pole_a_name}`;
  } else if (score > 0) {
    leaning = "pole_b";
    label = `${Math.round(fraction * 100)}% toward ${pair.pole_b_name}`;
  } else {
    leaning = "balanced";
    label = `balanced between ${pair.pole_a_name} and ${pair.pole_b_name}`;
  }
  return {
    pairId: pair.id,
    poleA: pair.pole_a_name,
    poleB: pair.pole_b_name,
    fraction,
    leaning,
    label,
    reasoning,
  };
}

/**
 * One spectrum row per selected dimension, in selection order. Dimensions
 * the node has no score for (never the case for server-built nodes) are
 * skipped rather than invented.
 */
export function dashboardRows(
  node: NodeView,
  dimensions: DimensionPairView[],
  selected: SelectedDimensionView[],
): SpectrumRow[] {
  const byId = new Map(dimensions.map((pair) => [pair.id, pair]));
  const rows: SpectrumRow[] = [];
  for (const selection of selected) {
    const pair = byId.get(selection.dimension_pair_id);
    if (pair === undefined) {
      continue;
    }
    const entry = node.scores.entries[pair.id];
    if (entry === undefined) {
      continue;
    }
    rows.push(rowFor(pair, entry.score, entry.reasoning));
  }
  return rows;
}
