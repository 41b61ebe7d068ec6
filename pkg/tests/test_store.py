"""Durability tests: log replay, snapshots, idempotency, crash recovery."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from tradespace.errors import ConflictError, IntegrityError, NotFoundError, ValidationError
from tradespace.model import ParentLink, ScoreEntry, ScoreVector
from tradespace.serialize import dumps
from tradespace.service.store import SessionStore

from conftest import build_pairs


def seeded_store(tmp_path: Path, **kwargs) -> tuple[SessionStore, str]:
    store = SessionStore(tmp_path / "data", **kwargs)
    session = store.create_session("test intent for persistence", build_pairs())
    store.select_dimensions(
        session.id,
        [("d-complexity", "X"), ("d-privacy", "Y"), ("d-scope", "Z")],
    )
    return store, session.id


def full_vector(x: int, y: int, z: int) -> ScoreVector:
    return ScoreVector(
        {
            "d-complexity": ScoreEntry(score=x),
            "d-privacy": ScoreEntry(score=y),
            "d-scope": ScoreEntry(score=z),
        }
    )


def add_seed(store: SessionStore, sid: str, title: str, x: int = 0) -> str:
    view = store.add_node(
        sid,
        name=title.lower().replace(" ", "-"),
        title=title,
        problem=f"problem text for {title}",
        scores=full_vector(x, 0, 0),
        parents=[],
        origin="seed",
    )
    return view["id"]


def reopened(store: SessionStore, tmp_path: Path) -> SessionStore:
    """Fresh store over the same directory, as if the process had died."""
    return SessionStore(
        tmp_path / "data",
        geometry=store.geometry,
        snapshot_interval=store.snapshot_interval,
    )


class TestRecovery:
    def test_create_then_reopen_restores_state(self, tmp_path):
        store, sid = seeded_store(tmp_path)
        add_seed(store, sid, "Alpha", 10)
        before = store.state(sid)

        fresh = reopened(store, tmp_path)
        assert fresh.state(sid) == before

    def test_reopen_preserves_export_bytes(self, tmp_path):
        store, sid = seeded_store(tmp_path)
        add_seed(store, sid, "Alpha", 10)
        add_seed(store, sid, "Beta", -5)
        text = dumps(store.get_session(sid))

        fresh = reopened(store, tmp_path)
        assert dumps(fresh.get_session(sid)) == text

    def test_unknown_session_raises(self, tmp_path):
        store = SessionStore(tmp_path / "data")
        with pytest.raises(NotFoundError):
            store.get_session("s-missing")

    def test_recovery_after_every_mutation_matches_live(self, tmp_path):
        store, sid = seeded_store(tmp_path)

        def check():
            assert reopened(store, tmp_path).state(sid) == store.state(sid)

        a = add_seed(store, sid, "Alpha", 10)
        check()
        b = add_seed(store, sid, "Beta", -20)
        check()
        store.add_node(
            sid,
            name="gamma",
            title="Gamma",
            problem="merged problem",
            scores=full_vector(0, 5, 5),
            parents=[ParentLink(a, "merged"), ParentLink(b, "merged")],
            origin="merged",
            extra_event=lambda n: ("merge", {"node_id": n.id, "source_ids": [a, b]}),
        )
        check()
        store.correct_scores(sid, a, {"d-privacy": 31})
        check()
        frag = store.create_fragment(
            sid, source_idea_id=a, text="problem text for Alpha"
        )["fragment"]["id"]
        check()
        store.add_node(
            sid,
            name="alpha-frag",
            title="Alpha with fragment",
            problem="rewritten",
            scores=full_vector(1, 2, 3),
            parents=[ParentLink(b, "fragment"), ParentLink(frag, "fragment")],
            origin="fragment",
            extra_event=lambda n: (
                "fragment_applied",
                {"node_id": n.id, "fragment_id": frag, "target_id": b},
            ),
        )
        check()
        store.toggle_axis(sid, "Z", False)
        check()
        store.append_client_events(
            sid,
            [
                {"kind": "rotation", "payload": {"view": [0, 0, -1]}, "timestamp": 2e12},
                {"kind": "view_change", "payload": {"face": "PosZ"}, "timestamp": 2e12},
            ],
        )
        check()

    def test_snapshot_written_and_used(self, tmp_path):
        store, sid = seeded_store(tmp_path, snapshot_interval=3)
        for i in range(6):
            add_seed(store, sid, f"Idea {i}", i)
        snap_path = tmp_path / "data" / "sessions" / sid / "snapshot.json"
        assert snap_path.exists()
        snapshot = json.loads(snap_path.read_text(encoding="utf-8"))
        assert snapshot["seq"] >= 3

        fresh = reopened(store, tmp_path)
        assert fresh.state(sid) == store.state(sid)

    def test_torn_final_line_is_dropped(self, tmp_path):
        store, sid = seeded_store(tmp_path)
        add_seed(store, sid, "Alpha", 10)
        before = store.state(sid)

        log_path = tmp_path / "data" / "sessions" / sid / "log.ndjson"
        with open(log_path, "a", encoding="utf-8") as fh:
            fh.write('{"seq": 99, "op": "node_added", "da')  # crash mid-append

        fresh = reopened(store, tmp_path)
        recovered = fresh.state(sid)
        assert recovered["nodes"] == before["nodes"]
        assert recovered["version"] == before["version"]

    def test_corrupt_interior_line_raises(self, tmp_path):
        store, sid = seeded_store(tmp_path)
        add_seed(store, sid, "Alpha", 10)
        log_path = tmp_path / "data" / "sessions" / sid / "log.ndjson"
        lines = log_path.read_text(encoding="utf-8").splitlines()
        lines[1] = "not json at all"
        log_path.write_text("\n".join(lines) + "\n", encoding="utf-8")

        with pytest.raises(IntegrityError):
            reopened(store, tmp_path).get_session(sid)

    def test_gap_in_sequence_raises(self, tmp_path):
        store, sid = seeded_store(tmp_path)
        add_seed(store, sid, "Alpha", 10)
        log_path = tmp_path / "data" / "sessions" / sid / "log.ndjson"
        lines = log_path.read_text(encoding="utf-8").splitlines()
        del lines[1]
        log_path.write_text("\n".join(lines) + "\n", encoding="utf-8")

        with pytest.raises(IntegrityError):
            reopened(store, tmp_path).get_session(sid)


class TestIdempotency:
    def test_same_token_returns_cached_response(self, tmp_path):
        store, sid = seeded_store(tmp_path)
        kwargs = dict(
            name="alpha",
            title="Alpha",
            problem="p",
            scores=full_vector(1, 2, 3),
            parents=[],
            origin="seed",
            token_key="steer:tok-1",
        )
        first = store.add_node(sid, **kwargs)
        second = store.add_node(sid, **kwargs)
        assert second == first
        assert len(store.get_session(sid).nodes) == 1

    def test_tokens_survive_recovery(self, tmp_path):
        store, sid = seeded_store(tmp_path)
        first = store.add_node(
            sid,
            name="alpha",
            title="Alpha",
            problem="p",
            scores=full_vector(1, 2, 3),
            parents=[],
            origin="seed",
            token_key="steer:tok-1",
        )
        fresh = reopened(store, tmp_path)
        assert fresh.cached_response(sid, "steer:tok-1") == first

    def test_correction_token(self, tmp_path):
        store, sid = seeded_store(tmp_path)
        nid = add_seed(store, sid, "Alpha", 10)
        first = store.correct_scores(
            sid, nid, {"d-privacy": 25}, token_key="correct:t9"
        )
        again = store.correct_scores(
            sid, nid, {"d-privacy": -40}, token_key="correct:t9"
        )
        assert again == first
        assert store.get_session(sid).get_node(nid).scores.entries["d-privacy"].score == 25
        assert len(store.get_session(sid).corrections) == 1


class TestGuards:
    def test_generation_flag_blocks_select_and_second_generate(self, tmp_path):
        store, sid = seeded_store(tmp_path)
        store.begin_generation(sid)
        with pytest.raises(ConflictError):
            store.begin_generation(sid)
        with pytest.raises(ConflictError):
            store.select_dimensions(sid, [("d-complexity", "X")])
        store.end_generation(sid)
        store.begin_generation(sid)
        store.end_generation(sid)

    def test_generation_requires_selection(self, tmp_path):
        store = SessionStore(tmp_path / "data")
        session = store.create_session("intent without selection", build_pairs())
        with pytest.raises(ConflictError):
            store.begin_generation(session.id)

    def test_client_event_batch_is_atomic(self, tmp_path):
        store, sid = seeded_store(tmp_path)
        before = len(store.get_session(sid).events)
        with pytest.raises(ValidationError):
            store.append_client_events(
                sid,
                [
                    {"kind": "rotation", "payload": {}, "timestamp": 2e12},
                    {"kind": "teleport", "payload": {}, "timestamp": 2e12},
                ],
            )
        assert len(store.get_session(sid).events) == before

    def test_client_event_out_of_order_rejected(self, tmp_path):
        store, sid = seeded_store(tmp_path)
        store.append_client_events(
            sid, [{"kind": "rotation", "payload": {}, "timestamp": 2e12}]
        )
        with pytest.raises(ValidationError):
            store.append_client_events(
                sid, [{"kind": "rotation", "payload": {}, "timestamp": 1.0}]
            )

    def test_empty_batch_rejected(self, tmp_path):
        store, sid = seeded_store(tmp_path)
        with pytest.raises(ValidationError):
            store.append_client_events(sid, [])


class TestViews:
    def test_state_positions_follow_enabled_axes(self, tmp_path):
        store, sid = seeded_store(tmp_path)
        add_seed(store, sid, "Alpha", 25)
        state = store.state(sid)
        node = state["nodes"][0]
        assert node["position"] == {"x": 0.5, "y": 0.0, "z": 0.0}
        assert node["display_size"] == 1.0

        store.toggle_axis(sid, "X", False)
        node = store.state(sid)["nodes"][0]
        assert node["position"]["x"] == 0.0

    def test_toggle_logs_dimension_toggle_event(self, tmp_path):
        store, sid = seeded_store(tmp_path)
        store.toggle_axis(sid, "Y", False)
        last = store.state(sid)["events"][-1]
        assert last["kind"] == "dimension_toggle"
        assert last["payload"] == {"axis": "Y", "enabled": False}
        assert last["source"] == "server"

    def test_tree_has_synthetic_root(self, tmp_path):
        store, sid = seeded_store(tmp_path)
        a = add_seed(store, sid, "Alpha", 10)
        b = add_seed(store, sid, "Beta", -10)
        store.add_node(
            sid,
            name="gamma",
            title="Gamma",
            problem="p",
            scores=full_vector(0, 0, 0),
            parents=[ParentLink(a, "merged"), ParentLink(b, "merged")],
            origin="merged",
        )
        tree = store.tree(sid)
        assert tree["nodes"][0]["id"] == "root"
        assert len(tree["nodes"]) == 4
        assert tree["depth"] == 2
        seed_edges = [e for e in tree["edges"] if e["parent"] == "root"]
        assert {e["kind"] for e in seed_edges} == {"seed"}
        assert len(seed_edges) == 2

    def test_version_counts_acknowledged_records(self, tmp_path):
        store, sid = seeded_store(tmp_path)
        v0 = store.version(sid)
        add_seed(store, sid, "Alpha", 10)
        assert store.version(sid) == v0 + 1
