"""Shared geometry test vectors.

The CLI's ``vectors`` subcommand serializes a seeded, deterministic set of
input/expected cases for every pure geometry operation. Any other
implementation of the same math (the browser client keeps one in
TypeScript) can load the file and check itself against this package
exactly, with no tolerance: the conversions are integer-exact and the
float cases compare bit-for-bit because both sides compute in IEEE-754
doubles.
"""

from __future__ import annotations

import json
import random
from pathlib import Path

from .geometry import (
    FACES,
    Position3,
    component_to_score,
    detect_merge_target,
    node_display_size,
    project_drag,
    snap_to_face,
    visible_axes,
)
from .model import SCORE_MAX, SCORE_MIN, ScoreEntry, ScoreVector

DEFAULT_SEED = 20250816
DEFAULT_DRAG_COUNT = 1000

_PAIR_BY_AXIS = {"X": "dx", "Y": "dy", "Z": "dz"}


def _score_vector(scores: dict[str, int]) -> ScoreVector:
    return ScoreVector({pid: ScoreEntry(score=v) for pid, v in scores.items()})


def _score_roundtrip_cases() -> list[dict]:
    return [{"score": s, "component": s / SCORE_MAX} for s in range(SCORE_MIN, SCORE_MAX + 1)]


def _component_cases(rng: random.Random) -> list[dict]:
    components = [-1.2, -1.0, -0.51, -0.5, -0.013, 0.0, 0.013, 0.5, 0.51, 1.0, 1.2]
    components += [rng.uniform(-1.5, 1.5) for _ in range(189)]
    return [{"component": c, "score": component_to_score(c)} for c in components]


def _snap_cases(rng: random.Random) -> list[dict]:
    views: list[tuple[float, float, float]] = [
        (0.0, 0.0, -1.0),
        (0.0, 0.0, 1.0),
        (-1.0, 0.0, 0.0),
        (1.0, 0.0, 0.0),
        (0.0, -1.0, 0.0),
        (0.0, 1.0, 0.0),
        (-1.0, -1.0, -1.0),  # three-way tie, resolved by face priority
        (1.0, 1.0, 1.0),
        (-1.0, 0.0, -1.0),
    ]
    while len(views) < 200:
        v = (rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1))
        if any(abs(c) > 1e-9 for c in v):
            views.append(v)
    return [{"view": list(v), "face": snap_to_face(v)} for v in views]


def _visible_axes_cases() -> list[dict]:
    out = []
    for face in FACES:
        plane = visible_axes(face)
        out.append(
            {
                "face": face,
                "horizontal": plane.horizontal,
                "horizontal_sign": plane.horizontal_sign,
                "vertical": plane.vertical,
                "vertical_sign": plane.vertical_sign,
                "locked": plane.locked,
            }
        )
    return out


def _drag_cases(rng: random.Random, count: int) -> list[dict]:
    cases = []
    for i in range(count):
        face = FACES[rng.randrange(len(FACES))]
        # every fifth case disables one axis to pin the keep-untouched rule
        axes = dict(_PAIR_BY_AXIS)
        if i % 5 == 4:
            dropped_axis = ("X", "Y", "Z")[rng.randrange(3)]
            del axes[dropped_axis]
        scores = {
            pid: rng.randint(SCORE_MIN, SCORE_MAX) for pid in _PAIR_BY_AXIS.values()
        }
        drop = (rng.uniform(-1.3, 1.3), rng.uniform(-1.3, 1.3))
        result = project_drag(_score_vector(scores), face, drop, axes)
        cases.append(
            {
                "face": face,
                "axes": axes,
                "scores": scores,
                "drop": list(drop),
                "expected": {pid: e.score for pid, e in result.entries.items()},
            }
        )
    return cases


def _merge_cases(rng: random.Random) -> list[dict]:
    cases = []
    for i in range(120):
        axes = dict(_PAIR_BY_AXIS)
        if i % 4 == 3:
            del axes[("X", "Y", "Z")[rng.randrange(3)]]
        dragged = Position3(
            rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)
        )
        others = []
        for j in range(rng.randint(0, 5)):
            others.append(
                (
                    f"n-{j}",
                    Position3(
                        dragged.x + rng.uniform(-0.3, 0.3),
                        dragged.y + rng.uniform(-0.3, 0.3),
                        dragged.z + rng.uniform(-0.3, 0.3),
                    ),
                )
            )
        threshold = rng.choice([0.15, 0.15, 0.3, 0.05])
        expected = detect_merge_target("dragged", dragged, others, axes, threshold)
        cases.append(
            {
                "dragged": [dragged.x, dragged.y, dragged.z],
                "others": [
                    {"id": oid, "position": [p.x, p.y, p.z]} for oid, p in others
                ],
                "axes": axes,
                "threshold": threshold,
                "expected": expected,
            }
        )
    return cases


def _display_size_cases(rng: random.Random) -> list[dict]:
    zs = [-1.0, -0.5, 0.0, 0.5, 1.0, -1.4, 1.4]
    zs += [rng.uniform(-1.2, 1.2) for _ in range(43)]
    return [
        {
            "z": z,
            "radius_min": 0.5,
            "radius_max": 1.5,
            "size": node_display_size(z, 0.5, 1.5),
        }
        for z in zs
    ]


def build_vectors(
    seed: int = DEFAULT_SEED, drag_count: int = DEFAULT_DRAG_COUNT
) -> dict:
    rng = random.Random(seed)
    return {
        "seed": seed,
        "score_roundtrip": _score_roundtrip_cases(),
        "component_to_score": _component_cases(rng),
        "snap": _snap_cases(rng),
        "visible_axes": _visible_axes_cases(),
        "drag": _drag_cases(rng, drag_count),
        "merge": _merge_cases(rng),
        "display_size": _display_size_cases(rng),
    }


def write_vectors(
    path: str | Path,
    seed: int = DEFAULT_SEED,
    drag_count: int = DEFAULT_DRAG_COUNT,
) -> Path:
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    doc = build_vectors(seed=seed, drag_count=drag_count)
    out.write_text(
        json.dumps(doc, ensure_ascii=False, indent=1) + "\n", encoding="utf-8"
    )
    return out
