/**
 * Client-side evaluation-cube geometry.
 *
 * This mirrors the server's pure geometry exactly: the cube spans [-1, +1]
 * on each axis, an axis component is score/50, and integer scores
 * round-trip without loss. Both sides compute in IEEE-754 doubles with the
 * same operation order, so the shared test vectors exported by the server
 * must reproduce bit-for-bit here — the conformance suite asserts strict
 * equality, never closeness.
 *
 * Scores are keyed by dimension-pair id; every conversion takes the
 * session's axis assignment (axis -> pair id, enabled axes only).
 */

export const SCORE_MIN = -50;
export const SCORE_MAX = 50;

export type Axis = "X" | "Y" | "Z";
export const AXES: readonly Axis[] = ["X", "Y", "Z"];

export type Face = "PosX" | "NegX" | "PosY" | "NegY" | "PosZ" | "NegZ";

// Priority order doubles as the tie-break order for snapping.
export const FACES: readonly Face[] = [
  "PosX",
  "NegX",
  "PosY",
  "NegY",
  "PosZ",
  "NegZ",
];

export interface Vec3 {
  x: number;
  y: number;
  z: number;
}

export const FACE_NORMALS: Record<Face, Vec3> = {
  PosX: { x: 1, y: 0, z: 0 },
  NegX: { x: -1, y: 0, z: 0 },
  PosY: { x: 0, y: 1, z: 0 },
  NegY: { x: 0, y: -1, z: 0 },
  PosZ: { x: 0, y: 0, z: 1 },
  NegZ: { x: 0, y: 0, z: -1 },
};

/**
 * Screen-plane table per face: which axis runs left-right, which runs
 * bottom-top, and which is locked (depth). Dragging right on a Pos* face
 * increases the horizontal axis; Neg* faces mirror left-right, so the
 * horizontal sign flips there. Vertical never flips.
 */
export interface VisibleAxes {
  horizontal: Axis;
  horizontalSign: 1 | -1;
  vertical: Axis;
  verticalSign: 1 | -1;
  locked: Axis;
}

const VISIBLE: Record<Face, VisibleAxes> = {
  PosZ: { horizontal: "X", horizontalSign: 1, vertical: "Y", verticalSign: 1, locked: "Z" },
  NegZ: { horizontal: "X", horizontalSign: -1, vertical: "Y", verticalSign: 1, locked: "Z" },
  PosX: { horizontal: "Z", horizontalSign: 1, vertical: "Y", verticalSign: 1, locked: "X" },
  NegX: { horizontal: "Z", horizontalSign: -1, vertical: "Y", verticalSign: 1, locked: "X" },
  PosY: { horizontal: "X", horizontalSign: 1, vertical: "Z", verticalSign: 1, locked: "Y" },
  NegY: { horizontal: "X", horizontalSign: -1, vertical: "Z", verticalSign: 1, locked: "Y" },
};

/** Axis -> dimension-pair id. An absent axis is disabled. */
export type AxisAssignment = Partial<Record<Axis, string>>;

/** Dimension-pair id -> integer score in [-50, +50]. */
export type Scores = Record<string, number>;

export class GeometryError extends Error {
  override name = "GeometryError";
}

// ---------------------------------------------------------------------------
// Rounding
// ---------------------------------------------------------------------------

/** Commercial rounding: 0.5 -> 1, -0.5 -> -1. */
export function roundHalfAwayFromZero(value: number): number {
  if (value >= 0) {
    return Math.floor(value + 0.5);
  }
  // + 0 folds Math.ceil's negative zero into plain zero
  return Math.ceil(value - 0.5) + 0;
}

function clamp(value: number, low: number, high: number): number {
  return Math.max(low, Math.min(high, value));
}

function component(position: Vec3, axis: Axis): number {
  return axis === "X" ? position.x : axis === "Y" ? position.y : position.z;
}

// ---------------------------------------------------------------------------
// Score <-> position
// ---------------------------------------------------------------------------

/** Cube position for a score vector. Disabled axes sit at 0. */
export function scoreToPosition(scores: Scores, axes: AxisAssignment): Vec3 {
  const out: Record<Axis, number> = { X: 0, Y: 0, Z: 0 };
  for (const axis of AXES) {
    const pairId = axes[axis];
    if (pairId === undefined) {
      continue;
    }
    const score = scores[pairId];
    if (score === undefined) {
      throw new GeometryError(
        `missing score for dimension '${pairId}' on axis ${axis}`,
      );
    }
    out[axis] = score / SCORE_MAX;
  }
  return { x: out.X, y: out.Y, z: out.Z };
}

/** One axis component back to an integer score, clamped to range. */
export function componentToScore(value: number): number {
  const c = clamp(value, -1.0, 1.0);
  return roundHalfAwayFromZero(c * SCORE_MAX);
}

/** Scores for the enabled axes of a position. */
export function positionToScores(position: Vec3, axes: AxisAssignment): Scores {
  const entries: Scores = {};
  for (const axis of AXES) {
    const pairId = axes[axis];
    if (pairId === undefined) {
      continue;
    }
    entries[pairId] = componentToScore(component(position, axis));
  }
  return entries;
}

// ---------------------------------------------------------------------------
// View snapping
// ---------------------------------------------------------------------------

/**
 * Face whose outward normal is most opposed to the view direction.
 *
 * `view` points from the camera toward the cube centre. Ties resolve by
 * face priority: PosX, NegX, PosY, NegY, PosZ, NegZ.
 */
export function snapToFace(view: readonly [number, number, number]): Face {
  const [vx, vy, vz] = view;
  if (!(Number.isFinite(vx) && Number.isFinite(vy) && Number.isFinite(vz))) {
    throw new GeometryError("view direction must be finite");
  }
  if (vx === 0 && vy === 0 && vz === 0) {
    throw new GeometryError("view direction must be non-zero");
  }
  const tx = -vx;
  const ty = -vy;
  const tz = -vz;
  let bestFace: Face = FACES[0] as Face;
  let bestDot = -Infinity;
  for (const face of FACES) {
    const n = FACE_NORMALS[face];
    const d = n.x * tx + n.y * ty + n.z * tz;
    if (d > bestDot) {
      bestDot = d;
      bestFace = face;
    }
  }
  return bestFace;
}

export function visibleAxes(face: Face): VisibleAxes {
  const plane = VISIBLE[face];
  if (plane === undefined) {
    throw new GeometryError(`unknown face '${face}'`);
  }
  return plane;
}

// ---------------------------------------------------------------------------
// Dragging
// ---------------------------------------------------------------------------

/**
 * Target scores for a node dropped at screen point (u, v) on a face.
 *
 * u runs left(-1) to right(+1), v bottom(-1) to top(+1). The two visible
 * axes take the converted drop coordinates; the locked axis, and any axis
 * not currently enabled, keep the node's stored score untouched.
 */
export function projectDrag(
  nodeScores: Scores,
  face: Face,
  drop: readonly [number, number],
  axes: AxisAssignment,
): Scores {
  const plane = visibleAxes(face);
  let [u, v] = drop;
  if (!(Number.isFinite(u) && Number.isFinite(v))) {
    throw new GeometryError("drop coordinates must be finite");
  }
  u = clamp(u, -1.0, 1.0);
  v = clamp(v, -1.0, 1.0);

  const result: Scores = { ...nodeScores };
  const moves: Array<[Axis, number, number]> = [
    [plane.horizontal, plane.horizontalSign, u],
    [plane.vertical, plane.verticalSign, v],
  ];
  for (const [axis, sign, coord] of moves) {
    const pairId = axes[axis];
    if (pairId === undefined) {
      continue;
    }
    result[pairId] = componentToScore(sign * coord);
  }
  return result;
}

/**
 * Nearest node within `threshold` of the dragged node, if any.
 *
 * Distance is Euclidean over the enabled axes only. Ties go to the
 * smallest node id so the answer never depends on iteration order.
 */
export function detectMergeTarget(
  draggedId: string,
  draggedPosition: Vec3,
  others: ReadonlyArray<{ id: string; position: Vec3 }>,
  axes: AxisAssignment,
  threshold = 0.15,
): string | null {
  if (threshold < 0) {
    throw new GeometryError("merge threshold must be non-negative");
  }
  const enabled = AXES.filter((axis) => axes[axis] !== undefined);
  let bestDistance = Infinity;
  let bestId: string | null = null;
  for (const other of others) {
    if (other.id === draggedId) {
      continue;
    }
    let sum = 0;
    for (const axis of enabled) {
      const delta = component(draggedPosition, axis) - component(other.position, axis);
      sum += delta ** 2;
    }
    const d = Math.sqrt(sum);
    if (
      d <= threshold &&
      (bestId === null || d < bestDistance || (d === bestDistance && other.id < bestId))
    ) {
      bestDistance = d;
      bestId = other.id;
    }
  }
  return bestId;
}

// ---------------------------------------------------------------------------
// Display size
// ---------------------------------------------------------------------------

/** Render radius as a linear function of depth: -1 -> min, +1 -> max. */
export function nodeDisplaySize(z: number, radiusMin = 0.5, radiusMax = 1.5): number {
  if (radiusMin > radiusMax) {
    throw new GeometryError("radiusMin must not exceed radiusMax");
  }
  const c = clamp(z, -1.0, 1.0);
  return radiusMin + ((c + 1.0) / 2.0) * (radiusMax - radiusMin);
}

/**
 * Depth of a position toward the camera once a face is snapped: the
 * component along the face normal. A node sitting on the pole the viewer
 * is looking at reads as close, and therefore large.
 */
export function depthTowardFace(position: Vec3, face: Face): number {
  const n = FACE_NORMALS[face];
  return position.x * n.x + position.y * n.y + position.z * n.z;
}
