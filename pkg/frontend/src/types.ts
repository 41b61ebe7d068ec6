/**
 * Wire types for the ideation server's HTTP + stream API.
 *
 * Field names match the server's JSON exactly (snake_case); these
 * interfaces are the single place the shape is written down on the client.
 */

import type { Axis, Face, Vec3 } from "./geometry.js";

export type EventSource = "server" | "client";

export type EventKind =
  | "session_created"
  | "drag_start"
  | "drag_end"
  | "post_drag_choice"
  | "idea_generated"
  | "merge"
  | "fragment_created"
  | "fragment_applied"
  | "rotation"
  | "dimension_toggle"
  | "view_change"
  | "score_correction";

export const EVENT_KINDS: readonly EventKind[] = [
  "session_created",
  "drag_start",
  "drag_end",
  "post_drag_choice",
  "idea_generated",
  "merge",
  "fragment_created",
  "fragment_applied",
  "rotation",
  "dimension_toggle",
  "view_change",
  "score_correction",
];

export type EdgeKind = "seed" | "steered" | "merged" | "fragment" | "corrected";

export type NodeOrigin = "seed" | "steered" | "merged" | "fragment";

export interface DimensionPairView {
  id: string;
  pole_a_name: string;
  pole_a_description: string;
  pole_b_name: string;
  pole_b_description: string;
  explanation: string;
  axis: Axis | null;
  enabled: boolean;
}

export interface ScoreEntryView {
  score: number;
  reasoning: string;
}

export interface ParentLinkView {
  node_or_fragment_id: string;
  edge_kind: EdgeKind;
}

export interface NodeView {
  id: string;
  name: string;
  title: string;
  problem: string;
  scores: { entries: Record<string, ScoreEntryView> };
  parents: ParentLinkView[];
  origin: NodeOrigin;
  created_at: number;
  position: Vec3;
  display_size: number;
}

export interface FragmentView {
  id: string;
  text: string;
  source_idea_id: string;
  created_at: number;
}

export interface CorrectionView {
  node_id: string;
  dimension_pair_id: string;
  old_score: number;
  new_score: number;
  timestamp: number;
}

export interface EventView {
  kind: EventKind;
  payload: Record<string, unknown>;
  timestamp: number;
  source: EventSource;
}

export interface SelectedDimensionView {
  dimension_pair_id: string;
  axis: Axis;
}

export interface SessionState {
  session_id: string;
  intent: string;
  created_at: number;
  version: number;
  generating: boolean;
  dimensions: DimensionPairView[];
  selected_dimensions: SelectedDimensionView[];
  nodes: NodeView[];
  fragments: FragmentView[];
  corrections: CorrectionView[];
  events: EventView[];
}

export interface TreeNodeView {
  id: string;
  title: string;
  origin: NodeOrigin | "intent";
  depth: number;
}

export interface TreeEdgeView {
  parent: string;
  child: string;
  kind: EdgeKind;
}

export interface TreeView {
  nodes: TreeNodeView[];
  edges: TreeEdgeView[];
  depth: number;
}

export interface IdeaDraftView {
  name: string;
  title: string;
  problem: string;
}

// -- request bodies ----------------------------------------------------------

export interface AssignmentBody {
  dimension_pair_id: string;
  axis: Axis;
}

export type SteerMode = "iterate" | "correct";

/** One queued client-side interaction event, before it is posted. */
export interface ClientEvent {
  kind: EventKind;
  payload: Record<string, unknown>;
  timestamp: number;
}

// -- responses ---------------------------------------------------------------

export interface CreateSessionResult {
  session_id: string;
  dimension_candidates: DimensionPairView[];
}

export interface SelectDimensionsResult {
  selected_dimensions: SelectedDimensionView[];
  dimensions: DimensionPairView[];
}

export interface ToggleAxisResult {
  dimensions: DimensionPairView[];
  selected_dimensions: SelectedDimensionView[];
  nodes: NodeView[];
}

export interface NodeResult {
  node: NodeView;
}

export interface CorrectionResult {
  node: NodeView;
  corrections: CorrectionView[];
}

export interface FragmentResult {
  fragment: FragmentView;
}

export interface EventsResult {
  accepted: number;
}

export interface GenerateOutcome {
  partial: boolean;
  node_ids: string[];
  drafts: IdeaDraftView[];
  nodes: NodeView[];
  errors: Array<{ code: string; message: string }>;
}

export interface GenerateHandlers {
  onDraft?: (index: number, draft: IdeaDraftView) => void;
  onScored?: (node: NodeView) => void;
  onError?: (code: string, message: string) => void;
}

export type { Axis, Face, Vec3 };
