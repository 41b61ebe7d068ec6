"""Prompt orchestration: the operations the service calls on a provider.

Each operation renders a template, sends it with the shared system persona,
and parses the reply. Parse failures are retried up to the configured
budget with a format reminder appended to the prompt; provider failures
surface immediately. A caller-supplied semaphore caps concurrent provider
calls for a session.
"""

from __future__ import annotations

import json
import threading
from contextlib import nullcontext
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from ..errors import ParseError, ValidationError
from ..model import DimensionPair, ScoreEntry, ScoreVector, new_id
from .parsing import (
    DimensionPairsSchema,
    DraftListSchema,
    DraftSchema,
    EvaluationSchema,
    IdeaDraft,
    Schema,
    parse_response,
)
from .providers import Provider, ProviderRequest
from .templates import TemplateStore

DEFAULT_SUGGEST_COUNT = 5
SEED_BATCH_SIZE = 3

_FORMAT_REMINDER = (
    "REMINDER: Your previous reply could not be parsed ({reason}). "
    "Respond again with THOUGHT followed by exactly the JSON payload "
    "requested above, with the exact field names."
)


@dataclass(frozen=True)
class EngineConfig:
    suggest_count: int = DEFAULT_SUGGEST_COUNT
    generation_temperature: float = 0.8
    evaluation_temperature: float = 0.2
    parse_retry_limit: int = 2  # extra attempts after the first
    max_in_flight: int = 3  # concurrent provider calls per session


@dataclass(frozen=True)
class CorrectionExample:
    """One past user correction, serialised into evaluation prompts."""

    idea_title: str
    dimension_label: str
    old_score: int
    new_score: int


@dataclass
class IdeationEngine:
    provider: Provider
    templates: TemplateStore = field(default_factory=TemplateStore)
    config: EngineConfig = field(default_factory=EngineConfig)

    def session_limiter(self) -> threading.BoundedSemaphore:
        """Cap on concurrent provider calls for one session."""
        return threading.BoundedSemaphore(self.config.max_in_flight)

    # -- plumbing ----------------------------------------------------------

    def _call(
        self,
        template_name: str,
        values: dict,
        schema: Schema,
        temperature: float,
        limiter: threading.BoundedSemaphore | None = None,
    ):
        system = self.templates.get("system").render()
        base_user = self.templates.get(template_name).render(**values)
        attempts = 1 + max(0, self.config.parse_retry_limit)
        last_error: ParseError | None = None
        for attempt in range(attempts):
            user = base_user
            if attempt > 0 and last_error is not None:
                reminder = _FORMAT_REMINDER.format(reason=last_error)
                user = f"{base_user}\n\n{reminder}"
            request = ProviderRequest(
                system=system, user=user, temperature=temperature
            )
            guard = limiter if limiter is not None else nullcontext()
            with guard:
                response = self.provider.complete(request)
            try:
                return parse_response(response.text, schema)
            except ParseError as exc:
                last_error = exc
        assert last_error is not None
        raise last_error

    # -- operations ---------------------------------------------------------

    def suggest_dimensions(
        self,
        intent: str,
        count: int | None = None,
        *,
        limiter: threading.BoundedSemaphore | None = None,
    ) -> list[DimensionPair]:
        """Propose bipolar dimension candidates for an intent."""
        if count is None:
            count = self.config.suggest_count
        if not isinstance(count, int) or not 1 <= count <= 10:
            raise ValidationError("dimension suggestion count must be 1..10")
        if not intent or not intent.strip():
            raise ValidationError("intent must be non-empty")
        parsed = self._call(
            "suggest_dimensions",
            {"intent": intent, "count": count},
            DimensionPairsSchema(count=count),
            self.config.generation_temperature,
            limiter,
        )
        return [
            DimensionPair(
                id=new_id("d"),
                pole_a_name=p.pole_a_name,
                pole_a_description=p.pole_a_description,
                pole_b_name=p.pole_b_name,
                pole_b_description=p.pole_b_description,
                explanation=p.explanation,
            )
            for p in parsed
        ]

    def generate_seed_ideas(
        self,
        intent: str,
        selected_pairs: Sequence[DimensionPair],
        related_works: str | None = None,
        *,
        limiter: threading.BoundedSemaphore | None = None,
    ) -> Iterator[IdeaDraft]:
        """One batch of three diverse drafts, yielded as they parse.

        Raises PartialResultError (carrying the drafts that did parse) if
        the provider cannot produce a full batch even after retries.
        """
        if not selected_pairs:
            raise ValidationError("select dimensions before generating ideas")
        drafts = self._call(
            "generate_ideas",
            {
                "intent": intent,
                "related_works": related_works or "(none provided)",
            },
            DraftListSchema(count=SEED_BATCH_SIZE),
            self.config.generation_temperature,
            limiter,
        )
        yield from drafts

    def evaluate_ideas(
        self,
        intent: str,
        drafts: Sequence[IdeaDraft],
        selected_pairs: Sequence[DimensionPair],
        corrections: Iterable[CorrectionExample] = (),
        *,
        limiter: threading.BoundedSemaphore | None = None,
    ) -> list[ScoreVector]:
        """Score drafts on the selected pairs. Order follows ``drafts``."""
        if not drafts:
            raise ValidationError("no drafts to evaluate")
        if not 1 <= len(selected_pairs) <= 3:
            raise ValidationError("evaluation needs between 1 and 3 dimensions")
        titles = [d.title for d in drafts]
        if len(set(titles)) != len(titles):
            raise ValidationError("draft titles within a batch must be unique")

        parsed = self._call(
            "evaluate",
            {
                "intent": intent,
                "ideas": _ideas_json(drafts),
                "dimensions": _dimensions_block(selected_pairs),
                "corrections": _corrections_block(corrections),
            },
            EvaluationSchema(
                titles=tuple(titles), dimension_count=len(selected_pairs)
            ),
            self.config.evaluation_temperature,
            limiter,
        )
        vectors: list[ScoreVector] = []
        for draft in drafts:
            entries = {}
            for pair, (score, reasoning) in zip(selected_pairs, parsed[draft.title]):
                entries[pair.id] = ScoreEntry(score=score, reasoning=reasoning)
            vectors.append(ScoreVector(entries))
        return vectors

    def steer_idea(
        self,
        intent: str,
        content: IdeaDraft,
        current_scores: ScoreVector,
        target_scores: ScoreVector,
        selected_pairs: Sequence[DimensionPair],
        *,
        limiter: threading.BoundedSemaphore | None = None,
    ) -> IdeaDraft:
        """Rewrite an idea so it belongs at the target scores.

        A no-op target (every score unchanged) returns the content as-is
        without touching the provider.
        """
        moves = []
        for pair in selected_pairs:
            cur = current_scores.entries[pair.id].score
            tgt = target_scores.entries[pair.id].score
            if cur == tgt:
                continue
            toward = pair.pole_a_name if tgt < cur else pair.pole_b_name
            moves.append(
                {
                    "dimension": pair.label,
                    "from": cur,
                    "to": tgt,
                    "toward": toward,
                }
            )
        if not moves:
            return content
        return self._call(
            "modify",
            {
                "idea": _draft_json(content),
                "modifications": json.dumps(moves, indent=2),
                "intent": intent,
            },
            DraftSchema(),
            self.config.generation_temperature,
            limiter,
        )

    def merge_ideas(
        self,
        idea_a: IdeaDraft,
        idea_b: IdeaDraft,
        *,
        limiter: threading.BoundedSemaphore | None = None,
    ) -> IdeaDraft:
        """Combine two ideas into one."""
        return self._call(
            "merge",
            {"idea_a": _draft_json(idea_a), "idea_b": _draft_json(idea_b)},
            DraftSchema(),
            self.config.generation_temperature,
            limiter,
        )

    def incorporate_fragment(
        self,
        idea: IdeaDraft,
        fragment_text: str,
        *,
        limiter: threading.BoundedSemaphore | None = None,
    ) -> IdeaDraft:
        """Fold a stored text fragment into an idea.

        Reuses the merge template with the fragment presented as Idea B;
        a dedicated incorporation prompt can replace this without touching
        callers.
        """
        if not fragment_text:
            raise ValidationError("fragment text must be non-empty")
        fragment_as_idea = IdeaDraft(
            name="fragment",
            title="Extracted fragment",
            problem=fragment_text,
        )
        return self.merge_ideas(idea, fragment_as_idea, limiter=limiter)


# ---------------------------------------------------------------------------
# Prompt-block rendering
# ---------------------------------------------------------------------------


def _draft_json(draft: IdeaDraft) -> str:
    return json.dumps(
        {"Name": draft.name, "Title": draft.title, "Problem": draft.problem},
        indent=2,
    )


def _ideas_json(drafts: Sequence[IdeaDraft]) -> str:
    return json.dumps(
        [
            {"Name": d.name, "Title": d.title, "Problem": d.problem}
            for d in drafts
        ],
        indent=2,
    )


def _dimensions_block(pairs: Sequence[DimensionPair]) -> str:
    lines = []
    for i, pair in enumerate(pairs, start=1):
        lines.append(f"Dimension Pair {i}: {pair.pole_a_name} vs {pair.pole_b_name}")
        lines.append(f"- {pair.pole_a_name} (Score: -50): {pair.pole_a_description}")
        lines.append(f"- {pair.pole_b_name} (Score: +50): {pair.pole_b_description}")
    return "\n".join(lines)


def _corrections_block(corrections: Iterable[CorrectionExample]) -> str:
    lines = [
        f'- idea "{c.idea_title}" was corrected on dimension '
        f'"{c.dimension_label}" from {c.old_score} to {c.new_score}'
        for c in corrections
    ]
    return "\n".join(lines) if lines else "(none)"
