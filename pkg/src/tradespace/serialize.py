"""Session export/import.

The document layout is stable: top-level keys {session, dimensions, nodes,
fragments, corrections, events}, field names matching the model types, and
scores as plain integers. import(export(s)) rebuilds an equal session, and
re-exporting yields byte-identical JSON, so exports are safe to diff and
to use as snapshot payloads.

The per-object to/from dict helpers are shared with the service layer:
log records and API responses carry the same shapes as exports.
"""

from __future__ import annotations

import json
from typing import Any

from .errors import FormatError
from .model import (
    AXES,
    EDGE_KINDS,
    EVENT_KINDS,
    EVENT_SOURCES,
    SCORE_MAX,
    SCORE_MIN,
    CorrectionRecord,
    DimensionPair,
    FragmentNode,
    IdeaNode,
    InteractionEvent,
    ParentLink,
    ScoreEntry,
    ScoreVector,
    SelectedDimension,
    Session,
    validate_graph,
)

FORMAT_VERSION = 1

_MISSING = object()


# ---------------------------------------------------------------------------
# Object -> dict
# ---------------------------------------------------------------------------


def pair_to_dict(p: DimensionPair) -> dict:
    return {
        "id": p.id,
        "pole_a_name": p.pole_a_name,
        "pole_a_description": p.pole_a_description,
        "pole_b_name": p.pole_b_name,
        "pole_b_description": p.pole_b_description,
        "explanation": p.explanation,
        "axis": p.axis,
        "enabled": p.enabled,
    }


def scores_to_dict(scores: ScoreVector) -> dict:
    return {
        "entries": {
            pid: {"score": e.score, "reasoning": e.reasoning}
            for pid, e in scores.entries.items()
        }
    }


def node_to_dict(n: IdeaNode) -> dict:
    return {
        "id": n.id,
        "name": n.name,
        "title": n.title,
        "problem": n.problem,
        "scores": scores_to_dict(n.scores),
        "parents": [
            {"node_or_fragment_id": l.node_or_fragment_id, "edge_kind": l.edge_kind}
            for l in n.parents
        ],
        "origin": n.origin,
        "created_at": n.created_at,
    }


def fragment_to_dict(f: FragmentNode) -> dict:
    return {
        "id": f.id,
        "text": f.text,
        "source_idea_id": f.source_idea_id,
        "created_at": f.created_at,
    }


def correction_to_dict(c: CorrectionRecord) -> dict:
    return {
        "node_id": c.node_id,
        "dimension_pair_id": c.dimension_pair_id,
        "old_score": c.old_score,
        "new_score": c.new_score,
        "timestamp": c.timestamp,
    }


def event_to_dict(e: InteractionEvent) -> dict:
    return {
        "kind": e.kind,
        "payload": e.payload,
        "timestamp": e.timestamp,
        "source": e.source,
    }


def export_session(session: Session) -> dict:
    """Plain-JSON document for the whole session, in creation order."""
    return {
        "format_version": FORMAT_VERSION,
        "session": {
            "id": session.id,
            "intent": session.intent,
            "created_at": session.created_at,
            "selected_dimensions": [
                {"dimension_pair_id": s.dimension_pair_id, "axis": s.axis}
                for s in session.selected_dimensions
            ],
        },
        "dimensions": [pair_to_dict(p) for p in session.dimension_candidates.values()],
        "nodes": [node_to_dict(n) for n in session.nodes.values()],
        "fragments": [fragment_to_dict(f) for f in session.fragments.values()],
        "corrections": [correction_to_dict(c) for c in session.corrections],
        "events": [event_to_dict(e) for e in session.events],
    }


def dumps(session: Session) -> str:
    return json.dumps(export_session(session), ensure_ascii=False, indent=2) + "\n"


# ---------------------------------------------------------------------------
# dict -> object, with path-bearing errors
# ---------------------------------------------------------------------------


def _want(value: Any, kind: type, path: str) -> Any:
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise FormatError("expected a number", path)
        return value
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise FormatError("expected an integer", path)
        return value
    if kind is bool:
        if not isinstance(value, bool):
            raise FormatError("expected a boolean", path)
        return value
    if not isinstance(value, kind):
        raise FormatError(f"expected {kind.__name__}", path)
    return value


def _get(obj: dict, key: str, kind: type, path: str, default: Any = _MISSING) -> Any:
    if not isinstance(obj, dict):
        raise FormatError("expected an object", path)
    if key not in obj:
        if default is not _MISSING:
            return default
        raise FormatError(f"missing field {key!r}", path)
    return _want(obj[key], kind, f"{path}.{key}")


def _get_nullable_str(obj: dict, key: str, path: str) -> str | None:
    if not isinstance(obj, dict):
        raise FormatError("expected an object", path)
    if key not in obj:
        raise FormatError(f"missing field {key!r}", path)
    value = obj[key]
    if value is None:
        return None
    return _want(value, str, f"{path}.{key}")


def _items(doc: dict, key: str, path: str = "$") -> list:
    return _get(doc, key, list, path)


def _score(value: Any, path: str) -> int:
    v = _want(value, int, path)
    if not SCORE_MIN <= v <= SCORE_MAX:
        raise FormatError(f"score {v} outside [{SCORE_MIN}, {SCORE_MAX}]", path)
    return v


def pair_from_dict(pdoc: Any, path: str = "$") -> DimensionPair:
    pair = DimensionPair(
        id=_get(pdoc, "id", str, path),
        pole_a_name=_get(pdoc, "pole_a_name", str, path),
        pole_a_description=_get(pdoc, "pole_a_description", str, path),
        pole_b_name=_get(pdoc, "pole_b_name", str, path),
        pole_b_description=_get(pdoc, "pole_b_description", str, path),
        explanation=_get(pdoc, "explanation", str, path),
        axis=_get_nullable_str(pdoc, "axis", path),
        enabled=_get(pdoc, "enabled", bool, path),
    )
    if pair.axis is not None and pair.axis not in AXES:
        raise FormatError(f"unknown axis {pair.axis!r}", f"{path}.axis")
    return pair


def scores_from_dict(sdoc: Any, path: str) -> ScoreVector:
    entries_doc = _get(sdoc, "entries", dict, path)
    entries: dict[str, ScoreEntry] = {}
    for pid, edoc in entries_doc.items():
        epath = f"{path}.entries[{pid!r}]"
        entries[pid] = ScoreEntry(
            score=_score(_get(edoc, "score", int, epath), f"{epath}.score"),
            reasoning=_get(edoc, "reasoning", str, epath),
        )
    return ScoreVector(entries)


def node_from_dict(ndoc: Any, path: str = "$") -> IdeaNode:
    parents = []
    for j, ldoc in enumerate(_items(ndoc, "parents", path)):
        lpath = f"{path}.parents[{j}]"
        link = ParentLink(
            node_or_fragment_id=_get(ldoc, "node_or_fragment_id", str, lpath),
            edge_kind=_get(ldoc, "edge_kind", str, lpath),
        )
        if link.edge_kind not in EDGE_KINDS:
            raise FormatError(f"unknown edge kind {link.edge_kind!r}", f"{lpath}.edge_kind")
        parents.append(link)
    return IdeaNode(
        id=_get(ndoc, "id", str, path),
        name=_get(ndoc, "name", str, path),
        title=_get(ndoc, "title", str, path),
        problem=_get(ndoc, "problem", str, path),
        scores=scores_from_dict(_get(ndoc, "scores", dict, path), f"{path}.scores"),
        parents=parents,
        origin=_get(ndoc, "origin", str, path),
        created_at=_get(ndoc, "created_at", float, path),
    )


def fragment_from_dict(fdoc: Any, path: str = "$") -> FragmentNode:
    return FragmentNode(
        id=_get(fdoc, "id", str, path),
        text=_get(fdoc, "text", str, path),
        source_idea_id=_get(fdoc, "source_idea_id", str, path),
        created_at=_get(fdoc, "created_at", float, path),
    )


def correction_from_dict(cdoc: Any, path: str = "$") -> CorrectionRecord:
    return CorrectionRecord(
        node_id=_get(cdoc, "node_id", str, path),
        dimension_pair_id=_get(cdoc, "dimension_pair_id", str, path),
        old_score=_score(_get(cdoc, "old_score", int, path), f"{path}.old_score"),
        new_score=_score(_get(cdoc, "new_score", int, path), f"{path}.new_score"),
        timestamp=_get(cdoc, "timestamp", float, path),
    )


def event_from_dict(edoc: Any, path: str = "$") -> InteractionEvent:
    event = InteractionEvent(
        kind=_get(edoc, "kind", str, path),
        payload=_get(edoc, "payload", dict, path),
        timestamp=_get(edoc, "timestamp", float, path),
        source=_get(edoc, "source", str, path),
    )
    if event.kind not in EVENT_KINDS:
        raise FormatError(f"unknown event kind {event.kind!r}", f"{path}.kind")
    if event.source not in EVENT_SOURCES:
        raise FormatError(f"unknown event source {event.source!r}", f"{path}.source")
    return event


# ---------------------------------------------------------------------------
# Whole-document import
# ---------------------------------------------------------------------------


def import_session(doc: dict) -> Session:
    """Rebuild a session from an exported document, validating as it goes.

    Shape problems raise FormatError naming the offending field's path;
    structural problems (dangling references, bad arity, cycles) surface
    as IntegrityError from the graph validator.
    """
    if not isinstance(doc, dict):
        raise FormatError("document must be a JSON object", "$")
    version = _get(doc, "format_version", int, "$", default=FORMAT_VERSION)
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported format_version {version}", "$.format_version")

    sdoc = _get(doc, "session", dict, "$")
    session = Session(
        id=_get(sdoc, "id", str, "$.session"),
        intent=_get(sdoc, "intent", str, "$.session"),
        created_at=_get(sdoc, "created_at", float, "$.session"),
    )
    if not session.intent.strip():
        raise FormatError("intent must be non-empty", "$.session.intent")
    session.note_existing_time(session.created_at)

    for i, pdoc in enumerate(_items(doc, "dimensions")):
        path = f"$.dimensions[{i}]"
        pair = pair_from_dict(pdoc, path)
        if pair.id in session.dimension_candidates:
            raise FormatError(f"duplicate dimension id {pair.id!r}", f"{path}.id")
        session.dimension_candidates[pair.id] = pair

    selected = _items(sdoc, "selected_dimensions", "$.session")
    if len(selected) > 3:
        raise FormatError(
            "more than 3 selected dimensions", "$.session.selected_dimensions"
        )
    seen_axes: set[str] = set()
    for i, seldoc in enumerate(selected):
        path = f"$.session.selected_dimensions[{i}]"
        sel = SelectedDimension(
            dimension_pair_id=_get(seldoc, "dimension_pair_id", str, path),
            axis=_get(seldoc, "axis", str, path),
        )
        if sel.axis not in AXES:
            raise FormatError(f"unknown axis {sel.axis!r}", f"{path}.axis")
        if sel.axis in seen_axes:
            raise FormatError(f"axis {sel.axis} selected twice", f"{path}.axis")
        seen_axes.add(sel.axis)
        if sel.dimension_pair_id not in session.dimension_candidates:
            raise FormatError(
                f"selected dimension {sel.dimension_pair_id!r} not in dimensions",
                f"{path}.dimension_pair_id",
            )
        session.selected_dimensions.append(sel)

    for i, ndoc in enumerate(_items(doc, "nodes")):
        path = f"$.nodes[{i}]"
        node = node_from_dict(ndoc, path)
        if node.id in session.nodes:
            raise FormatError(f"duplicate node id {node.id!r}", f"{path}.id")
        session.nodes[node.id] = node
        session.note_existing_time(node.created_at)

    for i, fdoc in enumerate(_items(doc, "fragments")):
        path = f"$.fragments[{i}]"
        frag = fragment_from_dict(fdoc, path)
        if frag.id in session.fragments or frag.id in session.nodes:
            raise FormatError(f"duplicate fragment id {frag.id!r}", f"{path}.id")
        session.fragments[frag.id] = frag
        session.note_existing_time(frag.created_at)

    for i, cdoc in enumerate(_items(doc, "corrections")):
        session.corrections.append(correction_from_dict(cdoc, f"$.corrections[{i}]"))

    for i, edoc in enumerate(_items(doc, "events")):
        path = f"$.events[{i}]"
        event = event_from_dict(edoc, path)
        if session.events and event.timestamp < session.events[-1].timestamp:
            raise FormatError("event timestamps decrease", f"{path}.timestamp")
        session.events.append(event)

    validate_graph(session)
    return session


def loads(text: str) -> Session:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"not valid JSON: {exc}", "$") from exc
    return import_session(doc)
