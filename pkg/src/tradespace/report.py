"""Static report rendering: figures plus a delimited score table.

``render_report`` writes three files into the output directory:

* ``space.png``  — the idea cloud in score space, axes labelled with the
  pole names, marker area tracking the depth-axis display radius.
* ``tree.png``   — the provenance tree, layered by depth.
* ``scores.csv`` — one row per idea with its scores on every selected
  dimension.

Everything renders offline through the Agg backend; no display needed.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .geometry import GeometryConfig, node_display_size, score_to_position
from .model import SCORE_MAX, SCORE_MIN, Session, provenance_tree

_EDGE_COLORS = {
    "seed": "#888888",
    "steered": "#1f77b4",
    "merged": "#d62728",
    "fragment": "#2ca02c",
    "corrected": "#9467bd",
}

_ORIGIN_MARKERS = {
    "intent": "s",
    "seed": "o",
    "steered": "^",
    "merged": "D",
    "fragment": "P",
    "corrected": "v",
}


def _axis_label(session: Session, axis: str) -> str:
    pair_id = session.axis_assignments().get(axis)
    if pair_id is None:
        return f"{axis} (unassigned)"
    pair = session.get_pair(pair_id)
    return f"{pair.pole_a_name} ({SCORE_MIN:+d})  to  {pair.pole_b_name} ({SCORE_MAX:+d})"


def render_space(session: Session, path: Path, geometry: GeometryConfig) -> None:
    axes_map = session.enabled_axes()
    fig = plt.figure(figsize=(9, 7))
    ax = fig.add_subplot(projection="3d")

    xs, ys, zs, sizes, labels = [], [], [], [], []
    for node in session.nodes.values():
        pos = score_to_position(node.scores, axes_map)
        xs.append(pos.x * SCORE_MAX)
        ys.append(pos.y * SCORE_MAX)
        zs.append(pos.z * SCORE_MAX)
        radius = node_display_size(
            pos.z, geometry.node_radius_min, geometry.node_radius_max
        )
        sizes.append(60.0 * radius * radius)
        labels.append(node.title)

    ax.scatter(xs, ys, zs, s=sizes, alpha=0.75, depthshade=True, c="#1f77b4")
    for x, y, z, label in zip(xs, ys, zs, labels):
        ax.text(x, y, z, f"  {label}", fontsize=7)

    ax.set_xlim(SCORE_MIN, SCORE_MAX)
    ax.set_ylim(SCORE_MIN, SCORE_MAX)
    ax.set_zlim(SCORE_MIN, SCORE_MAX)
    ax.set_xlabel(_axis_label(session, "X"), fontsize=8, wrap=True)
    ax.set_ylabel(_axis_label(session, "Y"), fontsize=8, wrap=True)
    ax.set_zlabel(_axis_label(session, "Z"), fontsize=8, wrap=True)
    ax.set_title(f"Trade-off space: {session.intent}", fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_tree(session: Session, path: Path) -> None:
    tree = provenance_tree(session)

    by_depth: dict[int, list[dict]] = {}
    for entry in tree["nodes"]:
        by_depth.setdefault(entry["depth"], []).append(entry)
    coords: dict[str, tuple[float, float]] = {}
    for depth, entries in by_depth.items():
        for i, entry in enumerate(entries):
            coords[entry["id"]] = (float(depth), -(i - (len(entries) - 1) / 2.0))

    fig, ax = plt.subplots(figsize=(9, 6))
    for edge in tree["edges"]:
        x0, y0 = coords[edge["parent"]]
        x1, y1 = coords[edge["child"]]
        color = _EDGE_COLORS.get(edge["kind"], "#444444")
        ax.plot([x0, x1], [y0, y1], color=color, linewidth=1.4, zorder=1)
        ax.annotate(
            edge["kind"],
            ((x0 + x1) / 2, (y0 + y1) / 2),
            fontsize=6,
            color=color,
            ha="center",
        )
    for entry in tree["nodes"]:
        x, y = coords[entry["id"]]
        marker = _ORIGIN_MARKERS.get(entry["origin"], "o")
        ax.scatter([x], [y], s=160, marker=marker, color="#ffffff",
                   edgecolors="#333333", zorder=2)
        title = entry["title"]
        if len(title) > 32:
            title = title[:29] + "..."
        ax.annotate(title, (x, y - 0.22), fontsize=7, ha="center", va="top")

    ax.set_title("Provenance tree", fontsize=10)
    ax.set_xlabel("depth")
    ax.set_xticks(sorted(by_depth))
    ax.set_yticks([])
    for spine in ("top", "right", "left"):
        ax.spines[spine].set_visible(False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def write_scores_csv(session: Session, path: Path) -> None:
    pairs = [session.get_pair(pid) for pid in session.selected_pair_ids()]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["node_id", "title", "origin", "created_at"]
            + [p.label for p in pairs]
        )
        for node in session.nodes.values():
            writer.writerow(
                [node.id, node.title, node.origin, repr(node.created_at)]
                + [node.scores.entries[p.id].score for p in pairs]
            )


def render_report(
    session: Session,
    out_dir: str | Path,
    *,
    geometry: GeometryConfig | None = None,
) -> dict[str, Path]:
    """Write space.png, tree.png and scores.csv; returns the paths."""
    geometry = geometry or GeometryConfig()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "space": out / "space.png",
        "tree": out / "tree.png",
        "scores": out / "scores.csv",
    }
    render_space(session, paths["space"], geometry)
    render_tree(session, paths["tree"])
    write_scores_csv(session, paths["scores"])
    return paths
