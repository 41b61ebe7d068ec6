"""Evaluation-cube geometry: score/position mapping, snapping, drag math.

Everything here is pure. The cube spans [-1, +1] on each axis; an axis
component is score/50, so integer scores round-trip exactly. Scores are
keyed by dimension-pair id, so every function that converts between scores
and positions takes the session's axis assignment (axis -> pair id).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import NotFoundError, ValidationError
from .model import AXES, ScoreEntry, ScoreVector, Session, SCORE_MAX

# ---------------------------------------------------------------------------
# Faces
# ---------------------------------------------------------------------------

# Priority order doubles as the tie-break order for snapping.
FACES: tuple[str, ...] = ("PosX", "NegX", "PosY", "NegY", "PosZ", "NegZ")

FACE_NORMALS: dict[str, tuple[float, float, float]] = {
    "PosX": (1.0, 0.0, 0.0),
    "NegX": (-1.0, 0.0, 0.0),
    "PosY": (0.0, 1.0, 0.0),
    "NegY": (0.0, -1.0, 0.0),
    "PosZ": (0.0, 0.0, 1.0),
    "NegZ": (0.0, 0.0, -1.0),
}

# Screen-plane table per face: which axis runs left-right, which runs
# bottom-top, and which is locked (depth). Dragging right on a Pos* face
# increases the horizontal axis; Neg* faces mirror left-right, so the
# horizontal sign flips there. Vertical never flips.
#
#   face  horizontal  h_sign  vertical  locked
#   PosZ      X         +1       Y        Z
#   NegZ      X         -1       Y        Z
#   PosX      Z         +1       Y        X
#   NegX      Z         -1       Y        X
#   PosY      X         +1       Z        Y
#   NegY      X         -1       Z        Y


@dataclass(frozen=True)
class VisibleAxes:
    horizontal: str
    horizontal_sign: int
    vertical: str
    vertical_sign: int
    locked: str


_VISIBLE: dict[str, VisibleAxes] = {
    "PosZ": VisibleAxes("X", +1, "Y", +1, "Z"),
    "NegZ": VisibleAxes("X", -1, "Y", +1, "Z"),
    "PosX": VisibleAxes("Z", +1, "Y", +1, "X"),
    "NegX": VisibleAxes("Z", -1, "Y", +1, "X"),
    "PosY": VisibleAxes("X", +1, "Z", +1, "Y"),
    "NegY": VisibleAxes("X", -1, "Z", +1, "Y"),
}


@dataclass(frozen=True)
class Position3:
    x: float
    y: float
    z: float

    def component(self, axis: str) -> float:
        return {"X": self.x, "Y": self.y, "Z": self.z}[axis]


@dataclass(frozen=True)
class GeometryConfig:
    merge_threshold: float = 0.15
    node_radius_min: float = 0.5
    node_radius_max: float = 1.5


# ---------------------------------------------------------------------------
# Rounding
# ---------------------------------------------------------------------------


def round_half_away_from_zero(value: float) -> int:
    """Commercial rounding: 0.5 -> 1, -0.5 -> -1. Python's round() banks."""
    if value >= 0:
        return math.floor(value + 0.5)
    return math.ceil(value - 0.5)


def _clamp(value: float, low: float, high: float) -> float:
    return max(low, min(high, value))


# ---------------------------------------------------------------------------
# Score <-> position
# ---------------------------------------------------------------------------


def score_to_position(scores: ScoreVector, axes: Mapping[str, str]) -> Position3:
    """Cube position for a score vector. Disabled axes sit at 0."""
    components = {}
    for axis in AXES:
        pair_id = axes.get(axis)
        if pair_id is None:
            components[axis] = 0.0
            continue
        entry = scores.entries.get(pair_id)
        if entry is None:
            raise ValidationError(f"missing score for dimension {pair_id!r} on axis {axis}")
        components[axis] = entry.score / SCORE_MAX
    return Position3(components["X"], components["Y"], components["Z"])


def component_to_score(component: float) -> int:
    """One axis component back to an integer score, clamped to range."""
    c = _clamp(component, -1.0, 1.0)
    return round_half_away_from_zero(c * SCORE_MAX)


def position_to_scores(position: Position3, axes: Mapping[str, str]) -> ScoreVector:
    """Scores for the enabled axes of a position. Reasoning comes back empty:
    positions chosen by dragging carry no model rationale."""
    entries = {}
    for axis in AXES:
        pair_id = axes.get(axis)
        if pair_id is None:
            continue
        entries[pair_id] = ScoreEntry(component_to_score(position.component(axis)))
    return ScoreVector(entries)


# ---------------------------------------------------------------------------
# View snapping
# ---------------------------------------------------------------------------


def snap_to_face(view: tuple[float, float, float]) -> str:
    """Face whose outward normal is most opposed to the view direction.

    ``view`` points from the camera toward the cube centre. Ties resolve
    by face priority: PosX, NegX, PosY, NegY, PosZ, NegZ.
    """
    vx, vy, vz = view
    if not all(math.isfinite(c) for c in (vx, vy, vz)):
        raise ValidationError("view direction must be finite")
    if vx == 0.0 and vy == 0.0 and vz == 0.0:
        raise ValidationError("view direction must be non-zero")
    target = (-vx, -vy, -vz)
    best_face = None
    best_dot = -math.inf
    for face in FACES:
        n = FACE_NORMALS[face]
        d = n[0] * target[0] + n[1] * target[1] + n[2] * target[2]
        if d > best_dot:
            best_dot = d
            best_face = face
    return best_face  # type: ignore[return-value]


def visible_axes(face: str) -> VisibleAxes:
    try:
        return _VISIBLE[face]
    except KeyError:
        raise ValidationError(f"unknown face {face!r}") from None


# ---------------------------------------------------------------------------
# Dragging
# ---------------------------------------------------------------------------


def project_drag(
    node_scores: ScoreVector,
    face: str,
    drop: tuple[float, float],
    axes: Mapping[str, str],
) -> ScoreVector:
    """Target scores for a node dropped at screen point (u, v) on a face.

    u runs left(-1) to right(+1), v bottom(-1) to top(+1). The two visible
    axes take the converted drop coordinates; the locked axis, and any axis
    not currently enabled, keep the node's stored score untouched.
    """
    plane = visible_axes(face)
    u, v = drop
    if not (math.isfinite(u) and math.isfinite(v)):
        raise ValidationError("drop coordinates must be finite")
    u = _clamp(u, -1.0, 1.0)
    v = _clamp(v, -1.0, 1.0)

    result = node_scores.copy()
    for axis, sign, coord in (
        (plane.horizontal, plane.horizontal_sign, u),
        (plane.vertical, plane.vertical_sign, v),
    ):
        pair_id = axes.get(axis)
        if pair_id is None:
            continue
        result.entries[pair_id] = ScoreEntry(component_to_score(sign * coord))
    return result


def detect_merge_target(
    dragged_id: str,
    dragged_position: Position3,
    others: Iterable[tuple[str, Position3]],
    axes: Mapping[str, str],
    threshold: float = GeometryConfig.merge_threshold,
) -> str | None:
    """Nearest node within ``threshold`` of the dragged node, if any.

    Distance is Euclidean over the enabled axes only. Ties go to the
    smallest node id so the answer never depends on iteration order.
    """
    if threshold < 0:
        raise ValidationError("merge threshold must be non-negative")
    enabled = [axis for axis in AXES if axes.get(axis) is not None]
    best: tuple[float, str] | None = None
    for other_id, pos in others:
        if other_id == dragged_id:
            continue
        d = math.sqrt(
            sum(
                (dragged_position.component(a) - pos.component(a)) ** 2
                for a in enabled
            )
        )
        if d <= threshold and (best is None or (d, other_id) < best):
            best = (d, other_id)
    return best[1] if best else None


# ---------------------------------------------------------------------------
# Display size and axis toggling
# ---------------------------------------------------------------------------


def node_display_size(
    z: float,
    radius_min: float = GeometryConfig.node_radius_min,
    radius_max: float = GeometryConfig.node_radius_max,
) -> float:
    """Render radius as a linear function of depth: -1 -> min, +1 -> max."""
    if radius_min > radius_max:
        raise ValidationError("radius_min must not exceed radius_max")
    z = _clamp(z, -1.0, 1.0)
    return radius_min + (z + 1.0) / 2.0 * (radius_max - radius_min)


def set_dimension_enabled(session: Session, axis: str, enabled: bool) -> None:
    """Toggle one axis's participation in the geometry.

    Stored scores for a disabled axis stay on the nodes untouched, so
    re-enabling restores the previous placement. At least one axis must
    stay enabled or the space would have no geometry at all.
    """
    if axis not in AXES:
        raise ValidationError(f"unknown axis {axis!r}")
    assignment = session.axis_assignments()
    pair_id = assignment.get(axis)
    if pair_id is None:
        raise NotFoundError(f"no dimension selected on axis {axis}")
    pair = session.dimension_candidates[pair_id]
    if not enabled and pair.enabled:
        remaining = [a for a, pid in session.enabled_axes().items() if a != axis]
        if not remaining:
            raise ValidationError("at least one axis must remain enabled")
    pair.enabled = enabled
