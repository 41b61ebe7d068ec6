"""Domain model: sessions, bipolar dimensions, idea nodes, provenance.

Scores live on a symmetric integer scale [-50, +50]. -50 means fully at
pole A, +50 fully at pole B, 0 balanced. A display layer may shift this
to 0..100 for presentation; everything here stays on the signed scale.

All mutations go through the functions in this module so that invariants
(score coverage, parent arity, event monotonicity, strictly increasing
creation times) hold no matter which caller drives them.
"""

from __future__ import annotations

import math
import time
import uuid
from dataclasses import dataclass, field

from .errors import ConflictError, IntegrityError, NotFoundError, ValidationError

# ---------------------------------------------------------------------------
# Constants
# ---------------------------------------------------------------------------

SCORE_MIN = -50
SCORE_MAX = 50

AXES: tuple[str, ...] = ("X", "Y", "Z")

# Provenance edge kinds. "corrected" is reserved: score corrections today
# rewrite the node in place instead of minting a corrected child.
EDGE_KINDS: frozenset[str] = frozenset(
    {"seed", "steered", "merged", "fragment", "corrected"}
)

# Interaction event taxonomy. The lifecycle kind "session_created" sits
# alongside the user-action kinds so a session's log is complete from the
# first record.
EVENT_KINDS: frozenset[str] = frozenset(
    {
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
    }
)

EVENT_SOURCES: frozenset[str] = frozenset({"server", "client"})

# Minimum spacing between minted creation times. Keeps creation order
# recoverable from timestamps alone, which lineage relies on.
_MINT_STEP = 1e-6


def new_id(prefix: str) -> str:
    return f"{prefix}-{uuid.uuid4().hex[:12]}"


# ---------------------------------------------------------------------------
# Value types
# ---------------------------------------------------------------------------


@dataclass
class DimensionPair:
    """A bipolar evaluation dimension: two named poles of one spectrum."""

    id: str
    pole_a_name: str
    pole_a_description: str
    pole_b_name: str
    pole_b_description: str
    explanation: str = ""
    axis: str | None = None  # X/Y/Z when selected, None otherwise
    enabled: bool = False

    @property
    def label(self) -> str:
        return f"{self.pole_a_name} vs {self.pole_b_name}"


@dataclass
class ScoreEntry:
    score: int
    reasoning: str = ""


@dataclass
class ScoreVector:
    """Scores keyed by dimension-pair id. Covers exactly the selected pairs."""

    entries: dict[str, ScoreEntry] = field(default_factory=dict)

    def copy(self) -> "ScoreVector":
        return ScoreVector(
            {pid: ScoreEntry(e.score, e.reasoning) for pid, e in self.entries.items()}
        )


@dataclass
class ParentLink:
    node_or_fragment_id: str
    edge_kind: str


@dataclass
class IdeaNode:
    id: str
    name: str
    title: str
    problem: str
    scores: ScoreVector
    parents: list[ParentLink]
    origin: str  # seed | steered | merged | fragment | corrected
    created_at: float


@dataclass
class FragmentNode:
    id: str
    text: str
    source_idea_id: str
    created_at: float


@dataclass
class CorrectionRecord:
    node_id: str
    dimension_pair_id: str
    old_score: int
    new_score: int
    timestamp: float


@dataclass
class InteractionEvent:
    kind: str
    payload: dict
    timestamp: float
    source: str  # server | client


@dataclass
class SelectedDimension:
    dimension_pair_id: str
    axis: str


@dataclass
class Session:
    id: str
    intent: str
    created_at: float
    dimension_candidates: dict[str, DimensionPair] = field(default_factory=dict)
    selected_dimensions: list[SelectedDimension] = field(default_factory=list)
    nodes: dict[str, IdeaNode] = field(default_factory=dict)
    fragments: dict[str, FragmentNode] = field(default_factory=dict)
    corrections: list[CorrectionRecord] = field(default_factory=list)
    events: list[InteractionEvent] = field(default_factory=list)

    # Largest creation time handed out so far; not serialized.
    _last_mint: float = field(default=0.0, repr=False, compare=False)

    # -- helpers -----------------------------------------------------------

    def mint_time(self, now: float | None = None) -> float:
        """Next creation timestamp, strictly greater than any minted before."""
        t = time.time() if now is None else now
        if t <= self._last_mint:
            t = self._last_mint + _MINT_STEP
        self._last_mint = t
        return t

    def note_existing_time(self, t: float) -> None:
        if t > self._last_mint:
            self._last_mint = t

    def selected_pair_ids(self) -> list[str]:
        return [s.dimension_pair_id for s in self.selected_dimensions]

    def axis_assignments(self) -> dict[str, str]:
        """Axis -> dimension-pair id for the current selection."""
        return {s.axis: s.dimension_pair_id for s in self.selected_dimensions}

    def enabled_axes(self) -> dict[str, str]:
        """Axis -> pair id, restricted to pairs currently enabled."""
        out = {}
        for sel in self.selected_dimensions:
            pair = self.dimension_candidates[sel.dimension_pair_id]
            if pair.enabled:
                out[sel.axis] = sel.dimension_pair_id
        return out

    def get_node(self, node_id: str) -> IdeaNode:
        node = self.nodes.get(node_id)
        if node is None:
            raise NotFoundError(f"unknown idea node {node_id!r}")
        return node

    def get_fragment(self, fragment_id: str) -> FragmentNode:
        frag = self.fragments.get(fragment_id)
        if frag is None:
            raise NotFoundError(f"unknown fragment {fragment_id!r}")
        return frag

    def get_pair(self, pair_id: str) -> DimensionPair:
        pair = self.dimension_candidates.get(pair_id)
        if pair is None:
            raise NotFoundError(f"unknown dimension pair {pair_id!r}")
        return pair


# ---------------------------------------------------------------------------
# Score validation
# ---------------------------------------------------------------------------


def check_score_value(value, where: str = "score") -> int:
    # bool is an int subclass; reject it explicitly.
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError(f"{where} must be an integer, got {value!r}")
    if not SCORE_MIN <= value <= SCORE_MAX:
        raise ValidationError(
            f"{where} must be within [{SCORE_MIN}, {SCORE_MAX}], got {value}"
        )
    return value


def check_scores_cover_selection(session: Session, scores: ScoreVector) -> None:
    expected = set(session.selected_pair_ids())
    got = set(scores.entries.keys())
    if got != expected:
        missing = sorted(expected - got)
        extra = sorted(got - expected)
        raise ValidationError(
            "scores must cover exactly the selected dimensions; "
            f"missing={missing} extra={extra}"
        )
    for pid, entry in scores.entries.items():
        check_score_value(entry.score, where=f"score for {pid}")


# ---------------------------------------------------------------------------
# Session operations
# ---------------------------------------------------------------------------


def create_session(
    intent: str,
    *,
    session_id: str | None = None,
    created_at: float | None = None,
) -> Session:
    """New empty session. The intent is kept verbatim apart from trimming."""
    if not isinstance(intent, str) or not intent.strip():
        raise ValidationError("intent must be a non-empty string")
    intent = intent.strip()
    session = Session(
        id=session_id or new_id("s"),
        intent=intent,
        created_at=0.0,
    )
    session.created_at = session.mint_time(created_at)
    record_event(
        session,
        kind="session_created",
        payload={"session_id": session.id},
        source="server",
        timestamp=session.created_at,
    )
    return session


def add_dimension_candidates(session: Session, pairs: list[DimensionPair]) -> None:
    """Register proposed or user-authored pairs. Ids must be fresh."""
    for pair in pairs:
        if pair.id in session.dimension_candidates:
            raise ValidationError(f"duplicate dimension pair id {pair.id!r}")
        if not pair.pole_a_name.strip() or not pair.pole_b_name.strip():
            raise ValidationError("dimension poles must both be named")
        session.dimension_candidates[pair.id] = pair


def select_dimensions(
    session: Session, assignments: list[tuple[str, str]]
) -> list[SelectedDimension]:
    """Assign 1-3 candidate pairs to axes. Replaces any prior selection.

    Existing nodes keep their stored scores; nothing is re-evaluated here.
    """
    if not 1 <= len(assignments) <= 3:
        raise ValidationError("select between 1 and 3 dimension pairs")
    if session.nodes:
        # Nodes are scored against the selected pairs. Swapping the pair set
        # under them would leave every stored ScoreVector inconsistent, and
        # nothing re-evaluates automatically, so only axis remapping of the
        # same pairs is allowed once ideas exist.
        old = set(session.selected_pair_ids())
        new = {pair_id for pair_id, _ in assignments}
        if old != new:
            raise ConflictError(
                "cannot change which dimensions are selected while ideas "
                "exist; only axis reassignment is allowed"
            )
    seen_pairs: set[str] = set()
    seen_axes: set[str] = set()
    for pair_id, axis in assignments:
        session.get_pair(pair_id)
        if axis not in AXES:
            raise ValidationError(f"unknown axis {axis!r}")
        if pair_id in seen_pairs:
            raise ValidationError(f"dimension pair {pair_id!r} assigned twice")
        if axis in seen_axes:
            raise ValidationError(f"axis {axis} assigned twice")
        seen_pairs.add(pair_id)
        seen_axes.add(axis)

    for pair in session.dimension_candidates.values():
        pair.axis = None
        pair.enabled = False
    session.selected_dimensions = []
    for pair_id, axis in assignments:
        pair = session.dimension_candidates[pair_id]
        pair.axis = axis
        pair.enabled = True
        session.selected_dimensions.append(SelectedDimension(pair_id, axis))
    return session.selected_dimensions


_ARITY_BY_ORIGIN = {
    "seed": "no parents",
    "steered": "exactly one idea parent",
    "corrected": "exactly one idea parent",
    "merged": "exactly two distinct idea parents",
    "fragment": "exactly one idea parent and one fragment parent",
}


def _check_parent_arity(session: Session, origin: str, parents: list[ParentLink]) -> None:
    def fail() -> None:
        raise IntegrityError(
            f"origin {origin!r} requires {_ARITY_BY_ORIGIN[origin]}; "
            f"got {[(p.node_or_fragment_id, p.edge_kind) for p in parents]}"
        )

    if origin not in _ARITY_BY_ORIGIN:
        raise ValidationError(f"unknown origin {origin!r}")
    for link in parents:
        if link.edge_kind not in EDGE_KINDS:
            raise ValidationError(f"unknown edge kind {link.edge_kind!r}")

    if origin == "seed":
        if parents:
            fail()
        return

    if origin in ("steered", "corrected"):
        if len(parents) != 1 or parents[0].edge_kind != origin:
            fail()
        session.get_node(parents[0].node_or_fragment_id)
        return

    if origin == "merged":
        if len(parents) != 2 or any(p.edge_kind != "merged" for p in parents):
            fail()
        a, b = parents
        if a.node_or_fragment_id == b.node_or_fragment_id:
            raise IntegrityError("a merge needs two distinct parents")
        session.get_node(a.node_or_fragment_id)
        session.get_node(b.node_or_fragment_id)
        return

    # origin == "fragment"
    if len(parents) != 2 or any(p.edge_kind != "fragment" for p in parents):
        fail()
    idea_links = [p for p in parents if p.node_or_fragment_id in session.nodes]
    frag_links = [p for p in parents if p.node_or_fragment_id in session.fragments]
    if len(idea_links) != 1 or len(frag_links) != 1:
        fail()


def add_idea(
    session: Session,
    *,
    name: str,
    title: str,
    problem: str,
    scores: ScoreVector,
    parents: list[ParentLink],
    origin: str,
    node_id: str | None = None,
    created_at: float | None = None,
) -> IdeaNode:
    """Append an immutable idea node and log an idea_generated event."""
    if not session.selected_dimensions:
        raise ValidationError("dimensions must be selected before adding ideas")
    if not title.strip():
        raise ValidationError("idea title must be non-empty")
    check_scores_cover_selection(session, scores)
    _check_parent_arity(session, origin, parents)

    node = IdeaNode(
        id=node_id or new_id("n"),
        name=name,
        title=title,
        problem=problem,
        scores=scores,
        parents=list(parents),
        origin=origin,
        created_at=session.mint_time(created_at),
    )
    if node.id in session.nodes or node.id in session.fragments:
        raise ValidationError(f"id {node.id!r} already exists")
    session.nodes[node.id] = node
    record_event(
        session,
        kind="idea_generated",
        payload={
            "node_id": node.id,
            "origin": origin,
            "parents": [p.node_or_fragment_id for p in parents],
        },
        source="server",
        timestamp=node.created_at,
    )
    return node


def create_fragment(
    session: Session,
    *,
    source_idea_id: str,
    text: str,
    fragment_id: str | None = None,
    created_at: float | None = None,
) -> FragmentNode:
    """Store a verbatim snippet of an existing idea as a reusable fragment."""
    source = session.get_node(source_idea_id)
    if not text:
        raise ValidationError("fragment text must be non-empty")
    if text not in source.problem and text not in source.title and text not in source.name:
        raise ValidationError(
            "fragment text must be a verbatim substring of the source idea"
        )
    frag = FragmentNode(
        id=fragment_id or new_id("f"),
        text=text,
        source_idea_id=source_idea_id,
        created_at=session.mint_time(created_at),
    )
    if frag.id in session.fragments or frag.id in session.nodes:
        raise ValidationError(f"id {frag.id!r} already exists")
    session.fragments[frag.id] = frag
    record_event(
        session,
        kind="fragment_created",
        payload={"fragment_id": frag.id, "source_idea_id": source_idea_id},
        source="server",
        timestamp=frag.created_at,
    )
    return frag


def correct_scores(
    session: Session,
    node_id: str,
    new_scores: dict[str, int],
    *,
    timestamp: float | None = None,
) -> list[CorrectionRecord]:
    """Overwrite scores on one node, in place, keeping a correction trail.

    This is the single exception to node immutability. Content is untouched;
    no new node is minted.
    """
    node = session.get_node(node_id)
    if not new_scores:
        raise ValidationError("no corrections supplied")
    selected = set(session.selected_pair_ids())
    for pid, value in new_scores.items():
        if pid not in selected:
            raise ValidationError(f"dimension pair {pid!r} is not selected")
        if pid not in node.scores.entries:
            raise ValidationError(f"node {node_id!r} has no score for {pid!r}")
        check_score_value(value, where=f"corrected score for {pid}")

    ts = session.mint_time(timestamp)
    records: list[CorrectionRecord] = []
    changes = []
    for pid, value in new_scores.items():
        entry = node.scores.entries[pid]
        record = CorrectionRecord(
            node_id=node_id,
            dimension_pair_id=pid,
            old_score=entry.score,
            new_score=value,
            timestamp=ts,
        )
        entry.score = value
        session.corrections.append(record)
        records.append(record)
        changes.append(
            {"dimension_pair_id": pid, "old": record.old_score, "new": value}
        )
    record_event(
        session,
        kind="score_correction",
        payload={"node_id": node_id, "changes": changes},
        source="server",
        timestamp=ts,
    )
    return records


def record_event(
    session: Session,
    *,
    kind: str,
    payload: dict,
    source: str,
    timestamp: float | None = None,
) -> InteractionEvent:
    """Append one interaction event. Timestamps must never go backwards."""
    if kind not in EVENT_KINDS:
        raise ValidationError(f"unknown event kind {kind!r}")
    if source not in EVENT_SOURCES:
        raise ValidationError(f"unknown event source {source!r}")
    if not isinstance(payload, dict):
        raise ValidationError("event payload must be a JSON object")
    if timestamp is None:
        timestamp = time.time()
    if isinstance(timestamp, bool) or not isinstance(timestamp, (int, float)):
        raise ValidationError("event timestamp must be a number")
    if not math.isfinite(timestamp):
        raise ValidationError("event timestamp must be finite")
    if session.events and timestamp < session.events[-1].timestamp:
        raise ValidationError(
            f"event timestamp {timestamp} is earlier than the last logged "
            f"event at {session.events[-1].timestamp}"
        )
    event = InteractionEvent(kind=kind, payload=payload, timestamp=timestamp, source=source)
    session.events.append(event)
    return event


# ---------------------------------------------------------------------------
# Lineage and graph validation
# ---------------------------------------------------------------------------


@dataclass
class LineageEntry:
    id: str
    edge_kind: str


def _parent_links_of(session: Session, obj_id: str) -> list[ParentLink]:
    if obj_id in session.nodes:
        return session.nodes[obj_id].parents
    frag = session.fragments[obj_id]
    return [ParentLink(frag.source_idea_id, "fragment")]


def lineage(session: Session, node_id: str) -> list[LineageEntry]:
    """Every ancestor of a node, oldest first, each exactly once.

    Fragments count as ancestors and are followed through to the idea they
    were cut from. The edge kind reported for an ancestor is the kind of
    the link by which it was first reached walking up from the node.
    """
    session.get_node(node_id)
    discovered: dict[str, str] = {}
    queue: list[str] = [node_id]
    while queue:
        current = queue.pop(0)
        for link in _parent_links_of(session, current):
            pid = link.node_or_fragment_id
            if pid == node_id:
                raise IntegrityError(f"cycle detected through {node_id!r}")
            if pid not in discovered:
                discovered[pid] = link.edge_kind
                queue.append(pid)

    def created(obj_id: str) -> float:
        obj = session.nodes.get(obj_id) or session.fragments[obj_id]
        return obj.created_at

    ordered = sorted(discovered, key=lambda i: (created(i), i))
    return [LineageEntry(i, discovered[i]) for i in ordered]


def provenance_tree(session: Session) -> dict:
    """Provenance graph shaped for display, rooted at a synthetic node.

    The root stands for the research intent; seeds hang off it. Fragments
    are not tree nodes, so a fragment-built idea is attached through its
    idea parent only. Depth of a node is its longest path from the root.
    """
    depth: dict[str, int] = {"root": 0}
    nodes: list[dict] = [
        {"id": "root", "title": session.intent, "origin": "intent", "depth": 0}
    ]
    edges: list[dict] = []
    for node in session.nodes.values():  # insertion order == creation order
        idea_parents = [
            l for l in node.parents if l.node_or_fragment_id in session.nodes
        ]
        if not node.parents:
            edges.append({"parent": "root", "child": node.id, "kind": "seed"})
            depth[node.id] = 1
        else:
            for link in idea_parents:
                edges.append(
                    {
                        "parent": link.node_or_fragment_id,
                        "child": node.id,
                        "kind": link.edge_kind,
                    }
                )
            depth[node.id] = 1 + max(
                depth[l.node_or_fragment_id] for l in idea_parents
            )
        nodes.append(
            {
                "id": node.id,
                "title": node.title,
                "origin": node.origin,
                "depth": depth[node.id],
            }
        )
    return {"nodes": nodes, "edges": edges, "depth": max(depth.values())}


def validate_graph(session: Session) -> None:
    """Full structural check: references, arity, acyclicity, score coverage.

    Creation-time mutators already enforce all of this; importing documents
    and property tests go through here.
    """
    for node in session.nodes.values():
        try:
            _check_parent_arity(session, node.origin, node.parents)
        except NotFoundError as exc:
            raise IntegrityError(f"node {node.id!r}: {exc}") from exc
        check_scores_cover_selection(session, node.scores)
        for link in node.parents:
            if (
                link.node_or_fragment_id not in session.nodes
                and link.node_or_fragment_id not in session.fragments
            ):
                raise IntegrityError(
                    f"node {node.id!r} references missing parent "
                    f"{link.node_or_fragment_id!r}"
                )
    for frag in session.fragments.values():
        if frag.source_idea_id not in session.nodes:
            raise IntegrityError(
                f"fragment {frag.id!r} references missing idea {frag.source_idea_id!r}"
            )

    # Kahn's algorithm over idea+fragment parent links.
    ids = list(session.nodes) + list(session.fragments)
    indegree = {i: 0 for i in ids}
    children: dict[str, list[str]] = {i: [] for i in ids}
    for i in ids:
        for link in _parent_links_of(session, i):
            indegree[i] += 1
            children[link.node_or_fragment_id].append(i)
    ready = [i for i in ids if indegree[i] == 0]
    seen = 0
    while ready:
        current = ready.pop()
        seen += 1
        for child in children[current]:
            indegree[child] -= 1
            if indegree[child] == 0:
                ready.append(child)
    if seen != len(ids):
        raise IntegrityError("provenance graph contains a cycle")

    previous = None
    for event in session.events:
        if previous is not None and event.timestamp < previous:
            raise IntegrityError("event log timestamps decrease")
        previous = event.timestamp
