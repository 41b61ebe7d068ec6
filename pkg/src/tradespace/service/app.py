"""HTTP surface for tradespace sessions.

Every JSON response is wrapped in one envelope:

    {"status": "ok",    "data": {...}}
    {"status": "error", "error": {"code": ..., "message": ..., "detail"?: ...}}

The one non-JSON response is the generation stream: server-sent events
(``event:`` / ``data:`` lines) carrying ``idea_draft``, ``idea_scored``,
``error`` and ``batch_done`` messages, with a gap-free ``sequence``
counter starting at 0 so clients can detect dropped frames.

Mutations that mint ideas (steer, merge, fragment apply) require a client
``request_token``; retrying a token returns the original response instead
of minting a second node.
"""

from __future__ import annotations

import json
from typing import Any, Iterator

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, StreamingResponse
from pydantic import BaseModel, ConfigDict
from starlette.exceptions import HTTPException as StarletteHTTPException

from .. import __version__
from ..engine import (
    CorrectionExample,
    EngineConfig,
    IdeaDraft,
    IdeationEngine,
    TemplateStore,
    build_provider,
)
from ..errors import (
    ConfigError,
    ConflictError,
    FormatError,
    IntegrityError,
    NotFoundError,
    ParseError,
    PartialResultError,
    ProviderError,
    TradespaceError,
    ValidationError,
)
from ..model import (
    AXES,
    IdeaNode,
    ParentLink,
    ScoreEntry,
    ScoreVector,
    Session,
    check_score_value,
)
from ..serialize import correction_to_dict
from .config import AppConfig
from .store import SessionStore

_STATUS_BY_ERROR: tuple[tuple[type, int], ...] = (
    (NotFoundError, 404),
    (ConflictError, 409),
    (ProviderError, 502),
    (ParseError, 502),
    (ConfigError, 500),
    (IntegrityError, 500),
    (FormatError, 400),
    (ValidationError, 400),
)


def _status_for(exc: TradespaceError) -> int:
    for etype, status in _STATUS_BY_ERROR:
        if isinstance(exc, etype):
            return status
    return 500


def _ok(data: Any, status: int = 200) -> JSONResponse:
    return JSONResponse({"status": "ok", "data": data}, status_code=status)


def _fail(code: str, message: str, status: int, detail: Any = None) -> JSONResponse:
    error: dict[str, Any] = {"code": code, "message": message}
    if detail is not None:
        error["detail"] = detail
    return JSONResponse({"status": "error", "error": error}, status_code=status)


# -- request bodies ----------------------------------------------------------


class CreateSessionBody(BaseModel):
    model_config = ConfigDict(extra="forbid")
    intent: str


class AssignmentBody(BaseModel):
    model_config = ConfigDict(extra="forbid")
    dimension_pair_id: str
    axis: str


class SelectDimensionsBody(BaseModel):
    model_config = ConfigDict(extra="forbid")
    assignments: list[AssignmentBody]


class ToggleAxisBody(BaseModel):
    model_config = ConfigDict(extra="forbid")
    axis: str
    enabled: bool


class GenerateBody(BaseModel):
    model_config = ConfigDict(extra="forbid")
    related_works: str | None = None


class SteerBody(BaseModel):
    model_config = ConfigDict(extra="forbid")
    mode: str
    target_scores: dict[str, int]
    request_token: str


class MergeBody(BaseModel):
    model_config = ConfigDict(extra="forbid")
    node_a: str
    node_b: str
    request_token: str


class CreateFragmentBody(BaseModel):
    model_config = ConfigDict(extra="forbid")
    source_idea_id: str
    text: str
    request_token: str | None = None


class ApplyFragmentBody(BaseModel):
    model_config = ConfigDict(extra="forbid")
    target_node_id: str
    request_token: str


class EventBatchBody(BaseModel):
    model_config = ConfigDict(extra="forbid")
    events: list[dict]
    request_token: str | None = None


# -- app factory ---------------------------------------------------------------


def create_app(
    config: AppConfig | None = None,
    *,
    provider: Any = None,
    engine: IdeationEngine | None = None,
    store: SessionStore | None = None,
) -> FastAPI:
    config = config or AppConfig()
    if provider is None:
        provider = build_provider(
            config.provider.name,
            base_url=config.provider.base_url,
            model=config.provider.model,
            api_key_env=config.provider.api_key_env,
            timeout=config.provider.timeout,
        )
    if engine is None:
        templates = TemplateStore(config.prompts_dir) if config.prompts_dir else TemplateStore()
        templates.validate()
        engine = IdeationEngine(provider, templates=templates, config=EngineConfig())
    if store is None:
        store = SessionStore(
            config.persistence.dir,
            geometry=config.geometry,
            snapshot_interval=config.persistence.snapshot_interval,
        )

    app = FastAPI(title="tradespace", version=__version__)
    app.state.config = config
    app.state.store = store
    app.state.engine = engine

    # -- error envelope ----------------------------------------------------

    @app.exception_handler(TradespaceError)
    def _domain_error(request: Request, exc: TradespaceError) -> JSONResponse:
        detail = None
        if isinstance(exc, PartialResultError):
            detail = {"drafts": [vars(d) for d in exc.drafts]}
        return _fail(exc.code, str(exc), _status_for(exc), detail)

    @app.exception_handler(RequestValidationError)
    def _body_error(request: Request, exc: RequestValidationError) -> JSONResponse:
        detail = [
            {"loc": [str(part) for part in err.get("loc", [])], "msg": err.get("msg", "")}
            for err in exc.errors()
        ]
        return _fail("validation_error", "invalid request body", 400, detail)

    @app.exception_handler(StarletteHTTPException)
    def _http_error(request: Request, exc: StarletteHTTPException) -> JSONResponse:
        code = "not_found" if exc.status_code == 404 else "http_error"
        return _fail(code, str(exc.detail), exc.status_code)

    # -- shared helpers -------------------------------------------------------

    def _selected_pairs(session: Session) -> list:
        return [session.get_pair(s.dimension_pair_id) for s in session.selected_dimensions]

    def _correction_examples(session: Session) -> list:
        examples = []
        for c in session.corrections:
            examples.append(
                CorrectionExample(
                    idea_title=session.get_node(c.node_id).title,
                    dimension_label=session.get_pair(c.dimension_pair_id).label,
                    old_score=c.old_score,
                    new_score=c.new_score,
                )
            )
        return examples

    def _draft_of(node: IdeaNode) -> IdeaDraft:
        return IdeaDraft(name=node.name, title=node.title, problem=node.problem)

    def _score_vector(
        session: Session, raw: dict[str, int], *, require_full: bool
    ) -> ScoreVector:
        selected = set(session.selected_pair_ids())
        for pid, value in raw.items():
            if pid not in selected:
                raise ValidationError(f"dimension pair {pid!r} is not selected")
            check_score_value(value, where=f"target score for {pid}")
        if require_full and set(raw) != selected:
            missing = sorted(selected - set(raw))
            raise ValidationError(f"target scores missing dimension(s): {missing}")
        return ScoreVector({pid: ScoreEntry(score=v) for pid, v in raw.items()})

    def _node_response(node: IdeaNode, session: Session) -> dict:
        return {"node": store.node_view(session, node)}

    def _require_token(token: str | None) -> str:
        if not token or not token.strip():
            raise ValidationError("request_token is required")
        return token

    # -- endpoints ----------------------------------------------------------

    @app.post("/sessions")
    def create_session(body: CreateSessionBody) -> JSONResponse:
        candidates = engine.suggest_dimensions(body.intent)
        session = store.create_session(body.intent.strip(), candidates)
        state = store.state(session.id)
        return _ok(
            {
                "session_id": session.id,
                "dimension_candidates": state["dimensions"],
            },
            status=201,
        )

    @app.post("/sessions/{session_id}/dimensions")
    def select_dimensions(session_id: str, body: SelectDimensionsBody) -> JSONResponse:
        for a in body.assignments:
            if a.axis not in AXES:
                raise ValidationError(f"unknown axis {a.axis!r}")
        session = store.select_dimensions(
            session_id, [(a.dimension_pair_id, a.axis) for a in body.assignments]
        )
        state = store.state(session_id)
        return _ok(
            {
                "selected_dimensions": state["selected_dimensions"],
                "dimensions": state["dimensions"],
            }
        )

    @app.post("/sessions/{session_id}/axes")
    def toggle_axis(session_id: str, body: ToggleAxisBody) -> JSONResponse:
        if body.axis not in AXES:
            raise ValidationError(f"unknown axis {body.axis!r}")
        store.toggle_axis(session_id, body.axis, body.enabled)
        state = store.state(session_id)
        return _ok(
            {
                "dimensions": state["dimensions"],
                "selected_dimensions": state["selected_dimensions"],
                "nodes": state["nodes"],
            }
        )

    @app.post("/sessions/{session_id}/generate")
    def generate(session_id: str, body: GenerateBody | None = None) -> StreamingResponse:
        related_works = body.related_works if body else None
        session = store.get_session(session_id)
        store.begin_generation(session_id)

        def stream() -> Iterator[str]:
            seq = 0

            def sse(kind: str, payload: dict) -> str:
                nonlocal seq
                data = json.dumps({"sequence": seq, **payload}, ensure_ascii=False)
                seq += 1
                return f"event: {kind}\ndata: {data}\n\n"

            node_ids: list[str] = []
            partial = False
            try:
                pairs = _selected_pairs(session)
                limiter = store.limiter(session_id)
                drafts: list[IdeaDraft] = []
                try:
                    for index, draft in enumerate(
                        engine.generate_seed_ideas(
                            session.intent, pairs, related_works, limiter=limiter
                        )
                    ):
                        drafts.append(draft)
                        yield sse(
                            "idea_draft",
                            {
                                "index": index,
                                "draft": {
                                    "name": draft.name,
                                    "title": draft.title,
                                    "problem": draft.problem,
                                },
                            },
                        )
                except PartialResultError as exc:
                    for index, draft in enumerate(exc.drafts):
                        drafts.append(draft)
                        yield sse(
                            "idea_draft",
                            {
                                "index": index,
                                "draft": {
                                    "name": draft.name,
                                    "title": draft.title,
                                    "problem": draft.problem,
                                },
                            },
                        )
                    partial = True
                    yield sse("error", {"code": exc.code, "message": str(exc)})

                if drafts:
                    try:
                        vectors = engine.evaluate_ideas(
                            session.intent,
                            drafts,
                            pairs,
                            _correction_examples(session),
                            limiter=limiter,
                        )
                    except (ParseError, ProviderError) as exc:
                        partial = True
                        yield sse("error", {"code": exc.code, "message": str(exc)})
                    else:
                        for draft, scores in zip(drafts, vectors):
                            view = store.add_node(
                                session_id,
                                name=draft.name,
                                title=draft.title,
                                problem=draft.problem,
                                scores=scores,
                                parents=[],
                                origin="seed",
                                response_builder=_node_response,
                            )
                            node_ids.append(view["node"]["id"])
                            yield sse("idea_scored", view)
                else:
                    partial = True
            except (ParseError, ProviderError) as exc:
                partial = True
                yield sse("error", {"code": exc.code, "message": str(exc)})
            except TradespaceError as exc:
                partial = True
                yield sse("error", {"code": exc.code, "message": str(exc)})
            finally:
                store.end_generation(session_id)
            yield sse("batch_done", {"partial": partial, "node_ids": node_ids})

        return StreamingResponse(stream(), media_type="text/event-stream")

    @app.post("/sessions/{session_id}/nodes/{node_id}/steer")
    def steer(session_id: str, node_id: str, body: SteerBody) -> JSONResponse:
        token = _require_token(body.request_token)
        if body.mode not in ("iterate", "correct"):
            raise ValidationError(f"unknown steer mode {body.mode!r}")
        session = store.get_session(session_id)
        node = session.get_node(node_id)

        if body.mode == "correct":
            token_key = f"correct:{token}"
            cached = store.cached_response(session_id, token_key)
            if cached is not None:
                return _ok(cached)
            _score_vector(session, body.target_scores, require_full=False)
            changed = {
                pid: value
                for pid, value in body.target_scores.items()
                if node.scores.entries[pid].score != value
            }
            if not changed:
                raise ValidationError("correction changes no scores")

            def _correct_response(n: IdeaNode, s: Session, records: list) -> dict:
                return {
                    "node": store.node_view(s, n),
                    "corrections": [correction_to_dict(r) for r in records],
                }

            response = store.correct_scores(
                session_id,
                node_id,
                changed,
                token_key=token_key,
                response_builder=_correct_response,
            )
            return _ok(response)

        token_key = f"steer:{token}"
        cached = store.cached_response(session_id, token_key)
        if cached is not None:
            return _ok(cached)
        target = _score_vector(session, body.target_scores, require_full=True)
        draft = engine.steer_idea(
            session.intent,
            _draft_of(node),
            node.scores,
            target,
            _selected_pairs(session),
            limiter=store.limiter(session_id),
        )
        response = store.add_node(
            session_id,
            name=draft.name,
            title=draft.title,
            problem=draft.problem,
            scores=target,
            parents=[ParentLink(node_id, "steered")],
            origin="steered",
            token_key=token_key,
            response_builder=_node_response,
        )
        return _ok(response, status=201)

    @app.post("/sessions/{session_id}/merge")
    def merge(session_id: str, body: MergeBody) -> JSONResponse:
        token = _require_token(body.request_token)
        if body.node_a == body.node_b:
            raise ValidationError("merge requires two distinct nodes")
        session = store.get_session(session_id)
        node_a = session.get_node(body.node_a)
        node_b = session.get_node(body.node_b)
        token_key = f"merge:{token}"
        cached = store.cached_response(session_id, token_key)
        if cached is not None:
            return _ok(cached)

        limiter = store.limiter(session_id)
        draft = engine.merge_ideas(_draft_of(node_a), _draft_of(node_b), limiter=limiter)
        scores = engine.evaluate_ideas(
            session.intent,
            [draft],
            _selected_pairs(session),
            _correction_examples(session),
            limiter=limiter,
        )[0]
        response = store.add_node(
            session_id,
            name=draft.name,
            title=draft.title,
            problem=draft.problem,
            scores=scores,
            parents=[ParentLink(body.node_a, "merged"), ParentLink(body.node_b, "merged")],
            origin="merged",
            extra_event=lambda node: (
                "merge",
                {"node_id": node.id, "source_ids": [body.node_a, body.node_b]},
            ),
            token_key=token_key,
            response_builder=_node_response,
        )
        return _ok(response, status=201)

    @app.post("/sessions/{session_id}/fragments")
    def create_fragment(session_id: str, body: CreateFragmentBody) -> JSONResponse:
        token_key = f"fragment:{body.request_token}" if body.request_token else None
        cached = store.cached_response(session_id, token_key)
        if cached is not None:
            return _ok(cached)
        response = store.create_fragment(
            session_id,
            source_idea_id=body.source_idea_id,
            text=body.text,
            token_key=token_key,
        )
        return _ok(response, status=201)

    @app.post("/sessions/{session_id}/fragments/{fragment_id}/apply")
    def apply_fragment(
        session_id: str, fragment_id: str, body: ApplyFragmentBody
    ) -> JSONResponse:
        token = _require_token(body.request_token)
        session = store.get_session(session_id)
        fragment = session.get_fragment(fragment_id)
        target = session.get_node(body.target_node_id)
        token_key = f"apply:{token}"
        cached = store.cached_response(session_id, token_key)
        if cached is not None:
            return _ok(cached)

        limiter = store.limiter(session_id)
        draft = engine.incorporate_fragment(
            _draft_of(target), fragment.text, limiter=limiter
        )
        scores = engine.evaluate_ideas(
            session.intent,
            [draft],
            _selected_pairs(session),
            _correction_examples(session),
            limiter=limiter,
        )[0]
        response = store.add_node(
            session_id,
            name=draft.name,
            title=draft.title,
            problem=draft.problem,
            scores=scores,
            parents=[
                ParentLink(body.target_node_id, "fragment"),
                ParentLink(fragment_id, "fragment"),
            ],
            origin="fragment",
            extra_event=lambda node: (
                "fragment_applied",
                {
                    "node_id": node.id,
                    "fragment_id": fragment_id,
                    "target_id": body.target_node_id,
                },
            ),
            token_key=token_key,
            response_builder=_node_response,
        )
        return _ok(response, status=201)

    @app.post("/sessions/{session_id}/events")
    def post_events(session_id: str, body: EventBatchBody) -> JSONResponse:
        token_key = f"events:{body.request_token}" if body.request_token else None
        cached = store.cached_response(session_id, token_key)
        if cached is not None:
            return _ok(cached)
        response = store.append_client_events(
            session_id, body.events, token_key=token_key
        )
        return _ok(response)

    @app.get("/sessions/{session_id}/state")
    def get_state(session_id: str) -> JSONResponse:
        return _ok(store.state(session_id))

    @app.get("/sessions/{session_id}/tree")
    def get_tree(session_id: str) -> JSONResponse:
        return _ok(store.tree(session_id))

    return app
