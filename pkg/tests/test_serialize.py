from __future__ import annotations

import json

import pytest

from tradespace.errors import FormatError, IntegrityError
from tradespace.model import (
    ParentLink,
    add_idea,
    correct_scores,
    create_fragment,
    record_event,
)
from tradespace.serialize import dumps, export_session, import_session, loads

from conftest import make_session, vector


def populated_session():
    session = make_session("wearable health intent")
    a = add_idea(
        session, name="a", title="Idea A",
        problem="first problem, mentioning adaptive sampling",
        scores=vector(-40, 10, 0), parents=[], origin="seed",
    )
    b = add_idea(
        session, name="b", title="Idea B", problem="second problem",
        scores=vector(20, -5, 35), parents=[], origin="seed",
    )
    child = add_idea(
        session, name="c", title="Idea C", problem="steered problem",
        scores=vector(0, 0, 0),
        parents=[ParentLink(a.id, "steered")], origin="steered",
    )
    merged = add_idea(
        session, name="m", title="Idea M", problem="merged problem",
        scores=vector(5, 5, 5),
        parents=[ParentLink(child.id, "merged"), ParentLink(b.id, "merged")],
        origin="merged",
    )
    frag = create_fragment(session, source_idea_id=a.id, text="adaptive sampling")
    add_idea(
        session, name="f", title="Idea F", problem="fragment-informed problem",
        scores=vector(1, 2, 3),
        parents=[ParentLink(merged.id, "fragment"), ParentLink(frag.id, "fragment")],
        origin="fragment",
    )
    correct_scores(session, b.id, {"d-privacy": -30})
    record_event(session, kind="rotation", payload={"face": "PosX"},
                 source="client", timestamp=session.events[-1].timestamp)
    return session


def test_export_import_round_trip_is_exact():
    session = populated_session()
    text = dumps(session)
    rebuilt = loads(text)
    assert dumps(rebuilt) == text


def test_export_shape_and_integer_scores():
    doc = export_session(populated_session())
    assert set(doc) == {
        "format_version", "session", "dimensions", "nodes",
        "fragments", "corrections", "events",
    }
    for node in doc["nodes"]:
        for entry in node["scores"]["entries"].values():
            assert isinstance(entry["score"], int)
    kinds = {e["kind"] for e in doc["events"]}
    assert "session_created" in kinds
    assert doc["session"]["selected_dimensions"][0] == {
        "dimension_pair_id": "d-complexity", "axis": "X",
    }


def test_import_reports_offending_path():
    doc = export_session(populated_session())
    doc["nodes"][1]["scores"]["entries"]["d-privacy"]["score"] = 77
    with pytest.raises(FormatError) as err:
        import_session(doc)
    assert "nodes[1]" in str(err.value)

    doc = export_session(populated_session())
    del doc["session"]["intent"]
    with pytest.raises(FormatError) as err:
        import_session(doc)
    assert "$.session" in str(err.value)

    doc = export_session(populated_session())
    doc["events"][0]["kind"] = "teleport"
    with pytest.raises(FormatError) as err:
        import_session(doc)
    assert "events[0]" in str(err.value)


def test_import_rejects_structural_corruption():
    doc = export_session(populated_session())
    doc["nodes"][2]["parents"][0]["node_or_fragment_id"] = "n-ghost"
    with pytest.raises(IntegrityError):
        import_session(doc)


def test_import_rejects_duplicate_ids_and_bad_axis():
    doc = export_session(populated_session())
    doc["nodes"].append(dict(doc["nodes"][0]))
    with pytest.raises(FormatError):
        import_session(doc)

    doc = export_session(populated_session())
    doc["session"]["selected_dimensions"][0]["axis"] = "Q"
    with pytest.raises(FormatError):
        import_session(doc)


def test_import_rejects_non_json_and_wrong_version():
    with pytest.raises(FormatError):
        loads("{not json")
    doc = export_session(populated_session())
    doc["format_version"] = 99
    with pytest.raises(FormatError):
        import_session(doc)


def test_round_trip_preserves_event_payloads_exactly():
    session = populated_session()
    rebuilt = loads(dumps(session))
    assert [e.payload for e in rebuilt.events] == [e.payload for e in session.events]
    assert [e.timestamp for e in rebuilt.events] == [
        e.timestamp for e in session.events
    ]


def test_double_round_trip_stable_through_json_reload():
    session = populated_session()
    text = dumps(session)
    again = json.dumps(json.loads(text), ensure_ascii=False, indent=2) + "\n"
    assert again == text
