/**
 * Provenance tree layout.
 *
 * The server's tree endpoint returns nodes with their depth already
 * computed (root = the research intent at depth 0). This module only
 * decides where things go on screen: one column per depth, rows centred
 * within their column, edges carrying their kind so the renderer can
 * style seed/steered/merged/fragment links differently.
 */

import type { TreeEdgeView, TreeView } from "./types.js";

export interface PlacedTreeNode {
  id: string;
  title: string;
  origin: string;
  depth: number;
  x: number;
  y: number;
}

export interface PlacedTreeEdge extends TreeEdgeView {
  from: { x: number; y: number };
  to: { x: number; y: number };
}

export interface TreeLayout {
  nodes: PlacedTreeNode[];
  edges: PlacedTreeEdge[];
  width: number;
  height: number;
}

export interface TreeLayoutOptions {
  columnGap?: number;
  rowGap?: number;
}

export function layoutTree(tree: TreeView, options: TreeLayoutOptions = {}): TreeLayout {
  const columnGap = options.columnGap ?? 220;
  const rowGap = options.rowGap ?? 90;

  const byDepth = new Map<number, number>();
  for (const node of tree.nodes) {
    byDepth.set(node.depth, (byDepth.get(node.depth) ?? 0) + 1);
  }

  const rowIndex = new Map<number, number>();
  const placed: PlacedTreeNode[] = [];
  const at = new Map<string, { x: number; y: number }>();
  let maxRows = 0;
  for (const node of tree.nodes) {
    const rows = byDepth.get(node.depth) ?? 1;
    maxRows = Math.max(maxRows, rows);
    const index = rowIndex.get(node.depth) ?? 0;
    rowIndex.set(node.depth, index + 1);
    const x = node.depth * columnGap;
    const y = (index - (rows - 1) / 2) * rowGap;
    at.set(node.id, { x, y });
    placed.push({ ...node, x, y });
  }

  const edges: PlacedTreeEdge[] = [];
  for (const edge of tree.edges) {
    const from = at.get(edge.parent);
    const to = at.get(edge.child);
    if (from === undefined || to === undefined) {
      continue;
    }
    edges.push({ ...edge, from, to });
  }

  return {
    nodes: placed,
    edges,
    width: (tree.depth + 1) * columnGap,
    height: Math.max(1, maxRows) * rowGap,
  };
}

/** Edges arriving at one node, e.g. to show a merge's two parents. */
export function incomingEdges(tree: TreeView, nodeId: string): TreeEdgeView[] {
  return tree.edges.filter((edge) => edge.child === nodeId);
}
