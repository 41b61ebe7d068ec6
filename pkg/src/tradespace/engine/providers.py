"""Model providers: a deterministic offline stub and a live HTTP client.

The stub is a pure function of the prompt text. It recognises the shipped
prompt shapes, reads the embedded JSON blocks back out of them, and answers
with valid THOUGHT-plus-JSON text. Scores and titles come from a fixture
table for the canonical wearable-health walkthrough and from a stable hash
for everything else, so runs are byte-identical across processes with no
network anywhere.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
from dataclasses import dataclass
from typing import Protocol

import httpx

from ..errors import ProviderError
from .parsing import extract_all_payloads

# ---------------------------------------------------------------------------
# Wire types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProviderRequest:
    system: str
    user: str
    temperature: float = 0.7
    max_tokens: int = 2048


@dataclass(frozen=True)
class ProviderResponse:
    text: str


class Provider(Protocol):
    name: str

    def complete(self, request: ProviderRequest) -> ProviderResponse:
        ...


# ---------------------------------------------------------------------------
# Deterministic helpers
# ---------------------------------------------------------------------------


def _fold(*parts: str, modulus: int) -> int:
    joined = "\x1f".join(parts).encode("utf-8")
    digest = hashlib.blake2b(joined, digest_size=8).digest()
    return int.from_bytes(digest, "big") % modulus


def _hex_tag(*parts: str, width: int = 6) -> str:
    joined = "\x1f".join(parts).encode("utf-8")
    return hashlib.blake2b(joined, digest_size=16).hexdigest()[:width]


def _slug(text: str) -> str:
    out = re.sub(r"[^a-z0-9]+", "-", text.lower()).strip("-")
    return out or "idea"


def deterministic_score(title: str, pole_a_name: str) -> int:
    """Stable pseudo-score in [-50, +50] for (idea title, dimension)."""
    return _fold(title, pole_a_name, modulus=101) - 50


# ---------------------------------------------------------------------------
# Canonical fixture: the wearable-health walkthrough
# ---------------------------------------------------------------------------

_WEARABLE_MARKER = "wearable"

FIXTURE_DIMENSIONS: list[dict[str, str]] = [
    {
        "dimensionA": "Complex Models",
        "descriptionA": "Rich multi-agent architectures with many interacting parts.",
        "dimensionB": "Simple Models",
        "descriptionB": "Lean, transparent methods that are cheap to run and audit.",
        "explanation": "How much modelling machinery the health pipeline carries.",
    },
    {
        "dimensionA": "Data Privacy",
        "descriptionA": "Keep raw biometric signals on the wearer's device.",
        "dimensionB": "Data Utilization",
        "descriptionB": "Pool and exploit every available signal for accuracy.",
        "explanation": "Whether accuracy is bought with more of the user's data.",
    },
    {
        "dimensionA": "Individual-Centric",
        "descriptionA": "Personalised models fit to a single wearer.",
        "dimensionB": "Population-Centric",
        "descriptionB": "Cohort-level models that generalise across users.",
        "explanation": "The granularity at which predictions are made.",
    },
    {
        "dimensionA": "Short-term Monitoring",
        "descriptionA": "React to what sensors show right now.",
        "dimensionB": "Long-term Prediction",
        "descriptionB": "Forecast health trajectories weeks or months out.",
        "explanation": "The prediction horizon the system commits to.",
    },
    {
        "dimensionA": "Single-Device",
        "descriptionA": "Depend on one wearable only.",
        "dimensionB": "Multi-Device",
        "descriptionB": "Fuse a whole body-area network of sensors.",
        "explanation": "How much hardware the approach assumes on the user.",
    },
]

FIXTURE_SEEDS: list[dict[str, str]] = [
    {
        "Name": "ethical-privacy-framework",
        "Title": "Ethical Privacy Framework",
        "Problem": (
            "Wearable health pipelines routinely ship raw biometric streams to "
            "remote servers, making consent an afterthought. Design a "
            "multi-agent architecture in which each agent is bound to an "
            "explicit consent contract and learns through federated on-device "
            "training, so sensitive signals never leave the wearer while the "
            "agent team still coordinates on shared, privacy-preserving risk "
            "summaries."
        ),
    },
    {
        "Name": "real-time-sensing-integration",
        "Title": "Real-Time Sensing Integration",
        "Problem": (
            "Most health predictors batch their inputs and miss the moment "
            "that matters. Build an agent team organised around sensor data "
            "throughput: heart rate, motion, and skin temperature are fused "
            "within seconds of capture, and the system degrades gracefully "
            "when a sensor drops out instead of stalling the whole pipeline."
        ),
    },
    {
        "Name": "agent-based-modeling",
        "Title": "Agent-Based Modeling",
        "Problem": (
            "Aggregate health scores hide the interplay between physiological "
            "subsystems. Simulate sleep, activity, and cardiovascular load as "
            "autonomous interacting agents, each with its own richly "
            "parameterised dynamics, and train the ensemble against wearable "
            "traces so emergent risk patterns become inspectable objects."
        ),
    },
]

# (title, pole A name) -> score. Covers the walkthrough's three selected
# pairs for each fixture idea plus the merged result.
FIXTURE_SCORES: dict[tuple[str, str], int] = {
    ("Ethical Privacy Framework", "Complex Models"): -15,
    ("Ethical Privacy Framework", "Data Privacy"): -35,
    ("Ethical Privacy Framework", "Individual-Centric"): -40,
    ("Real-Time Sensing Integration", "Complex Models"): 15,
    ("Real-Time Sensing Integration", "Data Privacy"): 20,
    ("Real-Time Sensing Integration", "Individual-Centric"): 0,
    ("Agent-Based Modeling", "Complex Models"): -42,
    ("Agent-Based Modeling", "Data Privacy"): -5,
    ("Agent-Based Modeling", "Individual-Centric"): 10,
    ("Adaptive ML Real-Time Health", "Complex Models"): 18,
    ("Adaptive ML Real-Time Health", "Data Privacy"): 22,
    ("Adaptive ML Real-Time Health", "Individual-Centric"): -5,
}

FIXTURE_MODIFY: dict[str, dict[str, str]] = {
    "Agent-Based Modeling": {
        "Name": "ml-real-time-processing",
        "Title": "ML Real-Time Processing",
        "Problem": (
            "Keep the cooperating-agents framing but replace heavyweight "
            "simulation with lightweight data-driven learners that consume "
            "wearable streams as they arrive. The agents trade model richness "
            "for immediate responsiveness, squeezing more value out of the "
            "available data while staying simple enough to run on-device."
        ),
    },
}

FIXTURE_MERGE: dict[frozenset[str], dict[str, str]] = {
    frozenset({"ML Real-Time Processing", "Real-Time Sensing Integration"}): {
        "Name": "adaptive-ml-real-time-health",
        "Title": "Adaptive ML Real-Time Health",
        "Problem": (
            "Unify streaming multi-sensor fusion with adaptive machine "
            "learning agents: fused heart-rate, motion, and temperature "
            "signals feed lightweight online learners that recalibrate to the "
            "wearer continuously, so health predictions stay current at "
            "real-time throughput without a heavyweight simulation core."
        ),
    },
}

GENERIC_DIMENSIONS: list[dict[str, str]] = [
    {
        "dimensionA": "Simple Models",
        "descriptionA": "Favour lean, interpretable methods.",
        "dimensionB": "Complex Models",
        "descriptionB": "Favour expressive, highly parameterised methods.",
        "explanation": "Model capacity versus transparency and cost.",
    },
    {
        "dimensionA": "Theory-Driven",
        "descriptionA": "Start from formal assumptions and derive behaviour.",
        "dimensionB": "Data-Driven",
        "descriptionB": "Let large datasets shape the solution end to end.",
        "explanation": "Where the approach gets its inductive bias.",
    },
    {
        "dimensionA": "Narrow Domain",
        "descriptionA": "Specialise deeply on one well-bounded setting.",
        "dimensionB": "Broad Generalization",
        "descriptionB": "Aim for transfer across many settings at once.",
        "explanation": "Scope of the claimed contribution.",
    },
    {
        "dimensionA": "Incremental Improvement",
        "descriptionA": "Strengthen an established line of work.",
        "dimensionB": "Paradigm Shift",
        "descriptionB": "Replace the framing the field currently uses.",
        "explanation": "Novelty and the risk profile that comes with it.",
    },
    {
        "dimensionA": "Simulation-Based Validation",
        "descriptionA": "Evidence from controlled synthetic environments.",
        "dimensionB": "Real-World Deployment",
        "descriptionB": "Evidence from live systems and users.",
        "explanation": "What counts as proof that the idea works.",
    },
    {
        "dimensionA": "Human-in-the-Loop",
        "descriptionA": "People steer, label, and veto throughout.",
        "dimensionB": "Fully Automated",
        "descriptionB": "The system runs without human intervention.",
        "explanation": "How much human oversight the design assumes.",
    },
    {
        "dimensionA": "Established Benchmarks",
        "descriptionA": "Measure against the community's standard tasks.",
        "dimensionB": "Novel Evaluation",
        "descriptionB": "Invent measures that fit the new capability.",
        "explanation": "Comparability versus fidelity of evaluation.",
    },
    {
        "dimensionA": "Low Compute",
        "descriptionA": "Run on commodity hardware within minutes.",
        "dimensionB": "High Compute",
        "descriptionB": "Assume cluster-scale training budgets.",
        "explanation": "The resource envelope the idea requires.",
    },
    {
        "dimensionA": "Single Modality",
        "descriptionA": "Work from one input signal done well.",
        "dimensionB": "Multi-Modal",
        "descriptionB": "Integrate several heterogeneous signals.",
        "explanation": "Breadth of the sensing or input surface.",
    },
    {
        "dimensionA": "Theoretical Depth",
        "descriptionA": "Prioritise guarantees and analysis.",
        "dimensionB": "Practical Application",
        "descriptionB": "Prioritise working artefacts and adoption.",
        "explanation": "Which audience the contribution speaks to first.",
    },
]

_GENERIC_ARCHETYPES: list[tuple[str, str, str]] = [
    (
        "mechanistic-foundations",
        "Mechanistic Foundations Study",
        "Build a first-principles account of {intent}. Identify the smallest "
        "set of assumptions that reproduces the phenomenon, formalise them, "
        "and derive testable predictions that existing systems violate.",
    ),
    (
        "field-deployment-probe",
        "Field Deployment Probe",
        "Take {intent} out of the lab: instrument a small real deployment, "
        "log where current methods break for actual users, and distil the "
        "recurring failure modes into a public benchmark.",
    ),
    (
        "hybrid-modeling-pipeline",
        "Hybrid Modeling Pipeline",
        "Combine learned components with hand-built structure for {intent}: "
        "let data fit the parts we cannot specify while explicit constraints "
        "keep the pipeline auditable and sample-efficient.",
    ),
]


# ---------------------------------------------------------------------------
# Stub provider
# ---------------------------------------------------------------------------


class StubProvider:
    """Offline provider. Identical requests yield byte-identical responses."""

    name = "stub"

    def complete(self, request: ProviderRequest) -> ProviderResponse:
        user = request.user
        if user.startswith("Based on the following research intent, suggest"):
            return ProviderResponse(self._suggest(user))
        if user.startswith("Generate THREE creative"):
            return ProviderResponse(self._generate(user))
        if user.startswith("Evaluate and score multiple research ideas"):
            return ProviderResponse(self._evaluate(user))
        if user.startswith("Given a research idea and score adjustments"):
            return ProviderResponse(self._modify(user))
        if user.startswith("Below are Idea A and Idea B"):
            return ProviderResponse(self._merge(user))
        raise ProviderError(
            "offline provider does not recognise this prompt; it only "
            "answers the shipped template shapes"
        )

    # -- prompt readers ------------------------------------------------

    @staticmethod
    def _intent_from(user: str, pattern: str) -> str:
        match = re.search(pattern, user)
        if not match:
            raise ProviderError("offline provider could not find the intent line")
        return match.group(1).strip()

    @staticmethod
    def _is_wearable(intent: str) -> bool:
        return _WEARABLE_MARKER in intent.lower()

    # -- suggestion ------------------------------------------------------

    def _suggest(self, user: str) -> str:
        intent = self._intent_from(user, r"Research Intent: (.+)")
        match = re.search(r"suggest (\d+) pairs", user)
        count = int(match.group(1)) if match else 5

        if self._is_wearable(intent):
            pool = FIXTURE_DIMENSIONS + [
                d for d in GENERIC_DIMENSIONS
                if d["dimensionA"] not in {f["dimensionA"] for f in FIXTURE_DIMENSIONS}
            ]
        else:
            pool = GENERIC_DIMENSIONS
        pairs = [dict(p) for p in pool[:count]]
        for pair in pairs:
            pair["explanation"] = (
                f"{pair['explanation']} Bears directly on: {intent}."
            )
        thought = (
            f"THOUGHT: Looking for the spectra that most sharply separate "
            f"credible approaches to {intent}. Each pair below is a genuine "
            f"trade-off, not two independent virtues."
        )
        return thought + "\n\n" + json.dumps({"dimension_pairs": pairs}, indent=2)

    # -- generation --------------------------------------------------------

    def _generate(self, user: str) -> str:
        intent = self._intent_from(user, r"Intent: (.+)")
        if self._is_wearable(intent):
            drafts = [dict(d) for d in FIXTURE_SEEDS]
        else:
            drafts = [
                {
                    "Name": name,
                    "Title": title,
                    "Problem": problem.format(intent=intent),
                }
                for name, title, problem in _GENERIC_ARCHETYPES
            ]
        thought = (
            "THOUGHT: Three directions with deliberately different "
            "methodologies and risk profiles, so they spread across any "
            "sensible evaluation spectrum."
        )
        return thought + "\n\n" + json.dumps(drafts, indent=2)

    # -- evaluation ----------------------------------------------------------

    def _evaluate(self, user: str) -> str:
        payloads = extract_all_payloads(user)
        ideas = next((p for p in payloads if isinstance(p, list)), None)
        if ideas is None:
            raise ProviderError("offline provider found no ideas block to score")
        dim_lines = re.findall(r"Dimension Pair \d+: (.+?) vs (.+)", user)
        if not dim_lines:
            raise ProviderError("offline provider found no dimension pairs")

        overrides: dict[tuple[str, str], int] = {}
        for title, label, new in re.findall(
            r'- idea "(.+?)" was corrected on dimension "(.+?)" '
            r"from (?:-?\d+) to (-?\d+)",
            user,
        ):
            pole_a = label.split(" vs ")[0]
            overrides[(title, pole_a)] = int(new)

        rows = []
        for idea in ideas:
            if not isinstance(idea, dict) or "Title" not in idea:
                continue
            title = str(idea["Title"])
            row: dict[str, object] = {"Title": title}
            for i, (pole_a, pole_b) in enumerate(dim_lines, start=1):
                pole_a = pole_a.strip()
                pole_b = pole_b.strip()
                score = overrides.get(
                    (title, pole_a),
                    FIXTURE_SCORES.get(
                        (title, pole_a), deterministic_score(title, pole_a)
                    ),
                )
                leaning = pole_a if score < 0 else pole_b if score > 0 else "balance"
                row[f"Dimension{i}Score"] = score
                row[f"Dimension{i}Reasoning"] = (
                    f"Sits at {score:+d}, leaning toward {leaning} given the "
                    f"approach described."
                )
            rows.append(row)
        thought = (
            "THOUGHT: Scoring each idea on every spectrum, keeping the "
            "original titles verbatim and spreading scores where the ideas "
            "genuinely differ."
        )
        return thought + "\n\n" + json.dumps(rows, indent=2)

    # -- modification ---------------------------------------------------------

    def _modify(self, user: str) -> str:
        payloads = extract_all_payloads(user)
        if not payloads or not isinstance(payloads[0], dict):
            raise ProviderError("offline provider found no original idea block")
        original = payloads[0]
        adjustments = payloads[1] if len(payloads) > 1 else []
        title = str(original.get("Title", "Untitled"))

        if title in FIXTURE_MODIFY:
            draft = dict(FIXTURE_MODIFY[title])
        else:
            adjustments_text = json.dumps(adjustments, sort_keys=True)
            tag = _hex_tag(title, adjustments_text)
            moves = []
            if isinstance(adjustments, list):
                for adj in adjustments:
                    if isinstance(adj, dict) and "toward" in adj:
                        moves.append(str(adj["toward"]))
            moved = ", ".join(moves) if moves else "the requested balance"
            draft = {
                "Name": _slug(f"{original.get('Name', 'idea')}-rebalanced-{tag}"),
                "Title": f"{title} (rebalanced {tag})",
                "Problem": (
                    f"{original.get('Problem', '')}\n\nRebalanced toward "
                    f"{moved}, reshaping the method so the new emphasis is "
                    f"structural rather than cosmetic."
                ),
            }
        thought = (
            "THOUGHT: Interpreting each adjustment as a concrete change of "
            "method, not a relabeling, while keeping the core contribution."
        )
        return thought + "\n\n" + json.dumps(draft, indent=2)

    # -- merging ---------------------------------------------------------------

    def _merge(self, user: str) -> str:
        payloads = [p for p in extract_all_payloads(user) if isinstance(p, dict)]
        if len(payloads) < 2:
            raise ProviderError("offline provider found fewer than two idea blocks")
        idea_a, idea_b = payloads[0], payloads[1]
        title_a = str(idea_a.get("Title", "Idea A"))
        title_b = str(idea_b.get("Title", "Idea B"))

        if str(idea_b.get("Name", "")) == "fragment":
            draft = {
                "Name": _slug(f"{idea_a.get('Name', 'idea')}-plus-frag"),
                "Title": f"{title_a} +frag",
                "Problem": (
                    f"{idea_a.get('Problem', '')}\n\nIncorporated fragment: "
                    f"{idea_b.get('Problem', '')}"
                ),
            }
        else:
            key = frozenset({title_a, title_b})
            if key in FIXTURE_MERGE:
                draft = dict(FIXTURE_MERGE[key])
            else:
                draft = {
                    "Name": _slug(
                        f"{idea_a.get('Name', 'a')}-x-{idea_b.get('Name', 'b')}"
                    ),
                    "Title": f"{title_a} + {title_b}",
                    "Problem": (
                        f"A combined programme.\n\nFrom the first idea: "
                        f"{idea_a.get('Problem', '')}\n\nFrom the second idea: "
                        f"{idea_b.get('Problem', '')}"
                    ),
                }
        thought = (
            "THOUGHT: Keeping the mechanism of the first idea and the "
            "evidence channel of the second so the merge is more than the "
            "sum of its parts."
        )
        return thought + "\n\n" + json.dumps(draft, indent=2)


# ---------------------------------------------------------------------------
# Live provider
# ---------------------------------------------------------------------------


class HttpProvider:
    """Chat-completions client for any OpenAI-compatible endpoint."""

    name = "live"

    def __init__(
        self,
        base_url: str,
        model: str,
        api_key: str | None = None,
        timeout: float = 60.0,
    ):
        if not base_url:
            raise ProviderError("live provider needs a base URL")
        if not model:
            raise ProviderError("live provider needs a model name")
        headers = {}
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        self.model = model
        self._client = httpx.Client(
            base_url=base_url.rstrip("/"), headers=headers, timeout=timeout
        )

    def complete(self, request: ProviderRequest) -> ProviderResponse:
        body = {
            "model": self.model,
            "messages": [
                {"role": "system", "content": request.system},
                {"role": "user", "content": request.user},
            ],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }
        try:
            response = self._client.post("/chat/completions", json=body)
            response.raise_for_status()
            data = response.json()
            text = data["choices"][0]["message"]["content"]
        except httpx.HTTPError as exc:
            raise ProviderError(f"provider request failed: {exc}") from exc
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise ProviderError(f"provider returned an unexpected shape: {exc}") from exc
        if not isinstance(text, str):
            raise ProviderError("provider returned non-text content")
        return ProviderResponse(text)

    def close(self) -> None:
        self._client.close()


def build_provider(
    name: str,
    *,
    base_url: str = "",
    model: str = "",
    api_key_env: str = "",
    timeout: float = 60.0,
) -> Provider:
    if name == "stub":
        return StubProvider()
    if name == "live":
        api_key = os.environ.get(api_key_env) if api_key_env else None
        return HttpProvider(base_url, model, api_key, timeout)
    raise ProviderError(f"unknown provider {name!r}; expected 'stub' or 'live'")
