"""Turning model replies into typed payloads.

Replies follow a THOUGHT-then-JSON convention, but nothing about them can
be trusted: the prose may contain brackets, the JSON may be cut off, fields
may be missing or mistyped. ``extract_payload`` walks the text for the
first balanced bracket pair that actually parses as JSON; the schema
classes then validate shape and ranges. Anything unexpected raises
ParseError (or PartialResultError when part of a batch survived) rather
than crashing or silently accepting bad values. Unknown extra fields are
ignored everywhere.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any

from ..errors import ParseError, PartialResultError
from ..model import SCORE_MAX, SCORE_MIN

_OPENERS = {"{": "}", "[": "]"}


@dataclass(frozen=True)
class IdeaDraft:
    name: str
    title: str
    problem: str


def _scan_balanced(text: str, start: int) -> int | None:
    """Index one past the closer matching the opener at ``start``, or None."""
    stack = [_OPENERS[text[start]]]
    in_string = False
    escaped = False
    for i in range(start + 1, len(text)):
        ch = text[i]
        if in_string:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == '"':
                in_string = False
            continue
        if ch == '"':
            in_string = True
        elif ch in _OPENERS:
            stack.append(_OPENERS[ch])
        elif ch in ("}", "]"):
            if ch != stack[-1]:
                return None  # mismatched nesting; give up on this opener
            stack.pop()
            if not stack:
                return i + 1
    return None


def extract_payload(text: str, start: int = 0) -> tuple[Any, int]:
    """First well-formed JSON object or array at or after ``start``.

    Returns (payload, end_index). The THOUGHT section is skipped naturally:
    prose rarely forms balanced JSON, and when stray brackets do balance
    but fail json.loads, scanning moves on to the next opener.
    """
    if not isinstance(text, str):
        raise ParseError("response is not text")
    i = start
    n = len(text)
    while i < n:
        ch = text[i]
        if ch in _OPENERS:
            end = _scan_balanced(text, i)
            if end is not None:
                candidate = text[i:end]
                try:
                    return json.loads(candidate), end
                except (json.JSONDecodeError, RecursionError):
                    pass
        i += 1
    raise ParseError("no JSON payload found in response", raw=text)


def extract_all_payloads(text: str) -> list[Any]:
    """Every non-overlapping payload in order. Used by the offline provider
    to read idea blocks back out of rendered prompts."""
    out: list[Any] = []
    pos = 0
    while True:
        try:
            payload, pos = extract_payload(text, pos)
        except ParseError:
            return out
        out.append(payload)


# ---------------------------------------------------------------------------
# Field helpers
# ---------------------------------------------------------------------------


def _field_str(obj: dict, key: str, where: str, raw: str) -> str:
    value = obj.get(key)
    if not isinstance(value, str) or not value.strip():
        raise ParseError(f"{where}: field {key!r} must be a non-empty string", raw=raw)
    return value


def _field_score(obj: dict, key: str, where: str, raw: str) -> int:
    value = obj.get(key)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError(f"{where}: field {key!r} must be an integer score", raw=raw)
    if not SCORE_MIN <= value <= SCORE_MAX:
        raise ParseError(
            f"{where}: score {value} outside [{SCORE_MIN}, {SCORE_MAX}]", raw=raw
        )
    return value


def _parse_draft(obj: Any, where: str, raw: str) -> IdeaDraft:
    if not isinstance(obj, dict):
        raise ParseError(f"{where}: expected an object", raw=raw)
    return IdeaDraft(
        name=_field_str(obj, "Name", where, raw),
        title=_field_str(obj, "Title", where, raw),
        problem=_field_str(obj, "Problem", where, raw),
    )


# ---------------------------------------------------------------------------
# Schemas
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DraftSchema:
    """A single idea object: {"Name", "Title", "Problem"}."""


@dataclass(frozen=True)
class DraftListSchema:
    """An array of exactly ``count`` idea objects."""

    count: int = 3


@dataclass(frozen=True)
class DimensionPairsSchema:
    """{"dimension_pairs": [{dimensionA, dimensionB, descriptionA,
    descriptionB, explanation}, ...]} with exactly ``count`` entries."""

    count: int = 5


@dataclass(frozen=True)
class EvaluationSchema:
    """Array of {"Title", Dimension1Score, Dimension1Reasoning, ...} objects,
    one per expected title, reconciled by exact title match."""

    titles: tuple[str, ...]
    dimension_count: int


@dataclass(frozen=True)
class ParsedDimensionPair:
    pole_a_name: str
    pole_a_description: str
    pole_b_name: str
    pole_b_description: str
    explanation: str


Schema = DraftSchema | DraftListSchema | DimensionPairsSchema | EvaluationSchema


def parse_response(raw: str, schema: Schema) -> Any:
    """Extract and validate one payload according to ``schema``.

    Raises ParseError on failure; PartialResultError when a batch schema
    got some valid items but not all of them.
    """
    payload, _ = extract_payload(raw)

    if isinstance(schema, DraftSchema):
        return _parse_draft(payload, "idea", raw)

    if isinstance(schema, DraftListSchema):
        if not isinstance(payload, list):
            raise ParseError("expected a JSON array of ideas", raw=raw)
        valid: list[IdeaDraft] = []
        problems: list[str] = []
        for i, item in enumerate(payload):
            try:
                valid.append(_parse_draft(item, f"ideas[{i}]", raw))
            except ParseError as exc:
                problems.append(str(exc))
        if len(valid) != schema.count or problems:
            raise PartialResultError(
                f"expected {schema.count} ideas, got {len(valid)} valid "
                f"({'; '.join(problems) or 'wrong count'})",
                raw=raw,
                drafts=valid,
            )
        return valid

    if isinstance(schema, DimensionPairsSchema):
        if not isinstance(payload, dict) or not isinstance(
            payload.get("dimension_pairs"), list
        ):
            raise ParseError('expected {"dimension_pairs": [...]}', raw=raw)
        pairs: list[ParsedDimensionPair] = []
        for i, item in enumerate(payload["dimension_pairs"]):
            where = f"dimension_pairs[{i}]"
            if not isinstance(item, dict):
                raise ParseError(f"{where}: expected an object", raw=raw)
            pairs.append(
                ParsedDimensionPair(
                    pole_a_name=_field_str(item, "dimensionA", where, raw),
                    pole_a_description=_field_str(item, "descriptionA", where, raw),
                    pole_b_name=_field_str(item, "dimensionB", where, raw),
                    pole_b_description=_field_str(item, "descriptionB", where, raw),
                    explanation=str(item.get("explanation", "")),
                )
            )
        if len(pairs) != schema.count:
            raise PartialResultError(
                f"expected {schema.count} dimension pairs, got {len(pairs)}",
                raw=raw,
                drafts=pairs,
            )
        return pairs

    if isinstance(schema, EvaluationSchema):
        if not isinstance(payload, list):
            raise ParseError("expected a JSON array of evaluations", raw=raw)
        by_title: dict[str, dict] = {}
        for item in payload:
            if not isinstance(item, dict) or not isinstance(item.get("Title"), str):
                continue  # unknown entries are ignored
            title = item["Title"]
            if title in by_title:
                raise ParseError(f"duplicate evaluation for title {title!r}", raw=raw)
            by_title[title] = item
        results: dict[str, list[tuple[int, str]]] = {}
        for title in schema.titles:
            item = by_title.get(title)
            if item is None:
                raise ParseError(
                    f"no evaluation matches title {title!r} exactly", raw=raw
                )
            scores: list[tuple[int, str]] = []
            for d in range(1, schema.dimension_count + 1):
                score = _field_score(item, f"Dimension{d}Score", title, raw)
                reasoning = item.get(f"Dimension{d}Reasoning", "")
                if not isinstance(reasoning, str):
                    reasoning = str(reasoning)
                scores.append((score, reasoning))
            results[title] = scores
        return results

    raise ParseError(f"unknown schema {schema!r}")
