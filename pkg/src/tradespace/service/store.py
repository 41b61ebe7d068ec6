"""Durable session store: append-only logs, snapshots, crash recovery.

Every acknowledged mutation appends exactly one record to the session's
log (``sessions/<id>/log.ndjson``), fsynced before the caller gets a
response. Records carry the minted ids and timestamps, so replay is fully
deterministic and never consults an LLM provider. Recovery loads the most
recent snapshot (if any) and replays the records past it through the same
model functions the live path used.

A record is ``{"seq": n, "op": ..., "data": {...}}`` plus optional
``token_key``/``response`` fields used to rebuild the idempotency map.
Mutations that create ideas carry a client token; retrying the same token
returns the stored response instead of re-running the operation.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

from .. import model
from ..errors import ConflictError, IntegrityError, NotFoundError, ValidationError
from ..geometry import GeometryConfig, node_display_size, score_to_position, set_dimension_enabled
from ..model import (
    DimensionPair,
    IdeaNode,
    InteractionEvent,
    ParentLink,
    ScoreVector,
    Session,
)
from ..serialize import (
    correction_to_dict,
    event_to_dict,
    export_session,
    fragment_to_dict,
    import_session,
    node_from_dict,
    node_to_dict,
    pair_from_dict,
    pair_to_dict,
    scores_from_dict,
)

_LOG_NAME = "log.ndjson"
_SNAPSHOT_NAME = "snapshot.json"

# How many provider calls one session may have in flight at once.
SESSION_MAX_IN_FLIGHT = 3


@dataclass
class _ManagedSession:
    session: Session
    directory: Path
    seq: int = 0
    tokens: dict[str, Any] = field(default_factory=dict)
    lock: threading.RLock = field(default_factory=threading.RLock)
    generating: bool = False
    limiter: threading.BoundedSemaphore = field(
        default_factory=lambda: threading.BoundedSemaphore(SESSION_MAX_IN_FLIGHT)
    )


class SessionStore:
    def __init__(
        self,
        data_dir: str | Path,
        *,
        geometry: GeometryConfig | None = None,
        snapshot_interval: int = 20,
    ) -> None:
        if snapshot_interval < 1:
            raise ValidationError("snapshot_interval must be >= 1")
        self.data_dir = Path(data_dir)
        self.geometry = geometry or GeometryConfig()
        self.snapshot_interval = snapshot_interval
        self._sessions: dict[str, _ManagedSession] = {}
        self._map_lock = threading.Lock()
        (self.data_dir / "sessions").mkdir(parents=True, exist_ok=True)

    # -- lookup ------------------------------------------------------------

    def _session_dir(self, session_id: str) -> Path:
        return self.data_dir / "sessions" / session_id

    def list_session_ids(self) -> list[str]:
        root = self.data_dir / "sessions"
        return sorted(p.name for p in root.iterdir() if (p / _LOG_NAME).exists())

    def _managed(self, session_id: str) -> _ManagedSession:
        with self._map_lock:
            managed = self._sessions.get(session_id)
            if managed is not None:
                return managed
            directory = self._session_dir(session_id)
            if not (directory / _LOG_NAME).exists():
                raise NotFoundError(f"unknown session {session_id!r}")
            managed = self._recover(session_id, directory)
            self._sessions[session_id] = managed
            return managed

    def get_session(self, session_id: str) -> Session:
        return self._managed(session_id).session

    def lock(self, session_id: str) -> threading.RLock:
        return self._managed(session_id).lock

    def limiter(self, session_id: str) -> threading.BoundedSemaphore:
        return self._managed(session_id).limiter

    def version(self, session_id: str) -> int:
        return self._managed(session_id).seq

    def cached_response(self, session_id: str, token_key: str | None) -> Any | None:
        """Stored response for an already-performed token, else None."""
        if token_key is None:
            return None
        managed = self._managed(session_id)
        with managed.lock:
            return managed.tokens.get(token_key)

    # -- persistence plumbing ------------------------------------------------

    def _append(
        self,
        managed: _ManagedSession,
        op: str,
        data: dict,
        *,
        token_key: str | None = None,
        response: Any = None,
    ) -> None:
        record: dict[str, Any] = {"seq": managed.seq + 1, "op": op, "data": data}
        if token_key is not None:
            record["token_key"] = token_key
            record["response"] = response
        line = json.dumps(record, ensure_ascii=False) + "\n"
        log_path = managed.directory / _LOG_NAME
        with open(log_path, "a", encoding="utf-8") as fh:
            fh.write(line)
            fh.flush()
            os.fsync(fh.fileno())
        managed.seq += 1
        if token_key is not None:
            managed.tokens[token_key] = response
        if managed.seq % self.snapshot_interval == 0:
            self._write_snapshot(managed)

    def _write_snapshot(self, managed: _ManagedSession) -> None:
        snapshot = {
            "seq": managed.seq,
            "doc": export_session(managed.session),
            "tokens": managed.tokens,
        }
        target = managed.directory / _SNAPSHOT_NAME
        tmp = target.with_suffix(".json.tmp")
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(snapshot, fh, ensure_ascii=False)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, target)
        dir_fd = os.open(managed.directory, os.O_RDONLY)
        try:
            os.fsync(dir_fd)
        finally:
            os.close(dir_fd)

    def _recover(self, session_id: str, directory: Path) -> _ManagedSession:
        session: Session | None = None
        seq = 0
        tokens: dict[str, Any] = {}

        snap_path = directory / _SNAPSHOT_NAME
        if snap_path.exists():
            try:
                snapshot = json.loads(snap_path.read_text(encoding="utf-8"))
            except json.JSONDecodeError as exc:
                raise IntegrityError(
                    f"snapshot for session {session_id!r} is corrupt: {exc}"
                ) from exc
            session = import_session(snapshot["doc"])
            seq = snapshot["seq"]
            tokens = dict(snapshot["tokens"])

        lines = (directory / _LOG_NAME).read_text(encoding="utf-8").splitlines()
        for i, line in enumerate(lines):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError:
                if i == len(lines) - 1:
                    break  # torn tail from a crash mid-append; never acknowledged
                raise IntegrityError(
                    f"log for session {session_id!r} is corrupt at line {i + 1}"
                )
            if record["seq"] <= seq:
                continue
            if record["seq"] != seq + 1:
                raise IntegrityError(
                    f"log for session {session_id!r} skips from seq {seq} "
                    f"to {record['seq']}"
                )
            session = self._replay(session, record)
            seq = record["seq"]
            if record.get("token_key") is not None:
                tokens[record["token_key"]] = record.get("response")

        if session is None:
            raise IntegrityError(f"session {session_id!r} has no usable records")
        if session.id != session_id:
            raise IntegrityError(
                f"directory {session_id!r} holds session {session.id!r}"
            )
        return _ManagedSession(
            session=session, directory=directory, seq=seq, tokens=tokens
        )

    def _replay(self, session: Session | None, record: dict) -> Session:
        op = record["op"]
        data = record["data"]
        if op == "session_created":
            if session is not None:
                raise IntegrityError("duplicate session_created record")
            session = model.create_session(
                data["intent"],
                session_id=data["session_id"],
                created_at=data["created_at"],
            )
            model.add_dimension_candidates(
                session, [pair_from_dict(p) for p in data["candidates"]]
            )
            return session
        if session is None:
            raise IntegrityError(f"record {op!r} precedes session_created")
        if op == "dimensions_selected":
            model.select_dimensions(
                session, [(pid, axis) for pid, axis in data["assignments"]]
            )
        elif op == "axis_toggled":
            set_dimension_enabled(session, data["axis"], data["enabled"])
            model.record_event(
                session,
                kind="dimension_toggle",
                payload={"axis": data["axis"], "enabled": data["enabled"]},
                source="server",
                timestamp=data["timestamp"],
            )
        elif op == "node_added":
            ndoc = data["node"]
            node = node_from_dict(ndoc)
            model.add_idea(
                session,
                name=node.name,
                title=node.title,
                problem=node.problem,
                scores=node.scores,
                parents=node.parents,
                origin=node.origin,
                node_id=node.id,
                created_at=node.created_at,
            )
            extra = data.get("extra_event")
            if extra is not None:
                model.record_event(
                    session,
                    kind=extra["kind"],
                    payload=extra["payload"],
                    source="server",
                    timestamp=extra["timestamp"],
                )
        elif op == "fragment_created":
            fdoc = data["fragment"]
            model.create_fragment(
                session,
                source_idea_id=fdoc["source_idea_id"],
                text=fdoc["text"],
                fragment_id=fdoc["id"],
                created_at=fdoc["created_at"],
            )
        elif op == "scores_corrected":
            model.correct_scores(
                session,
                data["node_id"],
                {pid: value for pid, value in data["new_scores"].items()},
                timestamp=data["timestamp"],
            )
        elif op == "client_events":
            for edoc in data["events"]:
                model.record_event(
                    session,
                    kind=edoc["kind"],
                    payload=edoc["payload"],
                    source=edoc["source"],
                    timestamp=edoc["timestamp"],
                )
        else:
            raise IntegrityError(f"unknown log record op {op!r}")
        return session

    # -- mutations -----------------------------------------------------------

    def create_session(
        self, intent: str, candidates: Sequence[DimensionPair]
    ) -> Session:
        session = model.create_session(intent)
        model.add_dimension_candidates(session, list(candidates))
        directory = self._session_dir(session.id)
        directory.mkdir(parents=True, exist_ok=False)
        managed = _ManagedSession(session=session, directory=directory)
        with self._map_lock:
            self._sessions[session.id] = managed
        with managed.lock:
            self._append(
                managed,
                "session_created",
                {
                    "session_id": session.id,
                    "intent": session.intent,
                    "created_at": session.created_at,
                    "candidates": [pair_to_dict(p) for p in candidates],
                },
            )
        return session

    def select_dimensions(
        self, session_id: str, assignments: Sequence[tuple[str, str]]
    ) -> Session:
        managed = self._managed(session_id)
        with managed.lock:
            if managed.generating:
                raise ConflictError("idea generation is in flight")
            model.select_dimensions(managed.session, list(assignments))
            self._append(
                managed,
                "dimensions_selected",
                {"assignments": [[pid, axis] for pid, axis in assignments]},
            )
        return managed.session

    def toggle_axis(self, session_id: str, axis: str, enabled: bool) -> Session:
        managed = self._managed(session_id)
        with managed.lock:
            session = managed.session
            set_dimension_enabled(session, axis, enabled)
            ts = session.mint_time()
            model.record_event(
                session,
                kind="dimension_toggle",
                payload={"axis": axis, "enabled": enabled},
                source="server",
                timestamp=ts,
            )
            self._append(
                managed,
                "axis_toggled",
                {"axis": axis, "enabled": enabled, "timestamp": ts},
            )
        return session

    def add_node(
        self,
        session_id: str,
        *,
        name: str,
        title: str,
        problem: str,
        scores: ScoreVector,
        parents: list[ParentLink],
        origin: str,
        extra_event: Callable[[IdeaNode], tuple[str, dict]] | None = None,
        token_key: str | None = None,
        response_builder: Callable[[IdeaNode, Session], Any] | None = None,
    ) -> Any:
        """Persist one idea node; returns response_builder's payload (or the node)."""
        managed = self._managed(session_id)
        with managed.lock:
            if token_key is not None and token_key in managed.tokens:
                return managed.tokens[token_key]
            session = managed.session
            node = model.add_idea(
                session,
                name=name,
                title=title,
                problem=problem,
                scores=scores,
                parents=parents,
                origin=origin,
            )
            extra_doc = None
            if extra_event is not None:
                kind, payload = extra_event(node)
                ts = session.mint_time()
                model.record_event(
                    session, kind=kind, payload=payload, source="server", timestamp=ts
                )
                extra_doc = {"kind": kind, "payload": payload, "timestamp": ts}
            response = (
                response_builder(node, session) if response_builder else node_to_dict(node)
            )
            self._append(
                managed,
                "node_added",
                {"node": node_to_dict(node), "extra_event": extra_doc},
                token_key=token_key,
                response=response,
            )
            return response

    def correct_scores(
        self,
        session_id: str,
        node_id: str,
        new_scores: dict[str, int],
        *,
        token_key: str | None = None,
        response_builder: Callable[[IdeaNode, Session, list], Any] | None = None,
    ) -> Any:
        managed = self._managed(session_id)
        with managed.lock:
            if token_key is not None and token_key in managed.tokens:
                return managed.tokens[token_key]
            session = managed.session
            records = model.correct_scores(session, node_id, new_scores)
            node = session.get_node(node_id)
            response = (
                response_builder(node, session, records)
                if response_builder
                else [correction_to_dict(r) for r in records]
            )
            self._append(
                managed,
                "scores_corrected",
                {
                    "node_id": node_id,
                    "new_scores": dict(new_scores),
                    "timestamp": records[0].timestamp,
                },
                token_key=token_key,
                response=response,
            )
            return response

    def create_fragment(
        self,
        session_id: str,
        *,
        source_idea_id: str,
        text: str,
        token_key: str | None = None,
    ) -> dict:
        managed = self._managed(session_id)
        with managed.lock:
            if token_key is not None and token_key in managed.tokens:
                return managed.tokens[token_key]
            frag = model.create_fragment(
                managed.session, source_idea_id=source_idea_id, text=text
            )
            response = {"fragment": fragment_to_dict(frag)}
            self._append(
                managed,
                "fragment_created",
                {"fragment": fragment_to_dict(frag)},
                token_key=token_key,
                response=response,
            )
            return response

    def append_client_events(
        self,
        session_id: str,
        events: Sequence[dict],
        *,
        token_key: str | None = None,
    ) -> dict:
        """Validate a whole client batch, then apply it atomically."""
        managed = self._managed(session_id)
        with managed.lock:
            if token_key is not None and token_key in managed.tokens:
                return managed.tokens[token_key]
            session = managed.session
            if not events:
                raise ValidationError("event batch is empty")
            last = session.events[-1].timestamp if session.events else float("-inf")
            checked: list[InteractionEvent] = []
            for i, edoc in enumerate(events):
                if not isinstance(edoc, dict):
                    raise ValidationError(f"event [{i}] must be an object")
                kind = edoc.get("kind")
                payload = edoc.get("payload", {})
                timestamp = edoc.get("timestamp")
                if kind not in model.EVENT_KINDS:
                    raise ValidationError(f"event [{i}] has unknown kind {kind!r}")
                if not isinstance(payload, dict):
                    raise ValidationError(f"event [{i}] payload must be an object")
                if isinstance(timestamp, bool) or not isinstance(timestamp, (int, float)):
                    raise ValidationError(f"event [{i}] timestamp must be a number")
                if timestamp < last:
                    raise ValidationError(
                        f"event [{i}] timestamp {timestamp} is out of order"
                    )
                last = timestamp
                checked.append(
                    InteractionEvent(
                        kind=kind, payload=payload, timestamp=timestamp, source="client"
                    )
                )
            for event in checked:
                model.record_event(
                    session,
                    kind=event.kind,
                    payload=event.payload,
                    source="client",
                    timestamp=event.timestamp,
                )
            response = {"accepted": len(checked)}
            self._append(
                managed,
                "client_events",
                {"events": [event_to_dict(e) for e in checked]},
                token_key=token_key,
                response=response,
            )
            return response

    # -- generation flag -----------------------------------------------------

    def begin_generation(self, session_id: str) -> None:
        managed = self._managed(session_id)
        with managed.lock:
            if managed.generating:
                raise ConflictError("idea generation is already in flight")
            if not managed.session.selected_dimensions:
                raise ConflictError("no dimensions selected yet")
            managed.generating = True

    def end_generation(self, session_id: str) -> None:
        managed = self._managed(session_id)
        with managed.lock:
            managed.generating = False

    def is_generating(self, session_id: str) -> bool:
        return self._managed(session_id).generating

    # -- read views ------------------------------------------------------------

    def node_view(self, session: Session, node: IdeaNode) -> dict:
        position = score_to_position(node.scores, session.enabled_axes())
        view = node_to_dict(node)
        view["position"] = {"x": position.x, "y": position.y, "z": position.z}
        view["display_size"] = node_display_size(
            position.z, self.geometry.node_radius_min, self.geometry.node_radius_max
        )
        return view

    def state(self, session_id: str) -> dict:
        managed = self._managed(session_id)
        with managed.lock:
            session = managed.session
            return {
                "session_id": session.id,
                "intent": session.intent,
                "created_at": session.created_at,
                "version": managed.seq,
                "generating": managed.generating,
                "dimensions": [
                    pair_to_dict(p) for p in session.dimension_candidates.values()
                ],
                "selected_dimensions": [
                    {"dimension_pair_id": s.dimension_pair_id, "axis": s.axis}
                    for s in session.selected_dimensions
                ],
                "nodes": [self.node_view(session, n) for n in session.nodes.values()],
                "fragments": [fragment_to_dict(f) for f in session.fragments.values()],
                "corrections": [correction_to_dict(c) for c in session.corrections],
                "events": [event_to_dict(e) for e in session.events],
            }

    def tree(self, session_id: str) -> dict:
        managed = self._managed(session_id)
        with managed.lock:
            return model.provenance_tree(managed.session)

    def export(self, session_id: str) -> dict:
        managed = self._managed(session_id)
        with managed.lock:
            return export_session(managed.session)

    def flush_snapshot(self, session_id: str) -> None:
        """Force a snapshot now (the CLI uses this before shutdown)."""
        managed = self._managed(session_id)
        with managed.lock:
            self._write_snapshot(managed)
