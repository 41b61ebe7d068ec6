from __future__ import annotations

import pytest

from tradespace.engine import (
    CorrectionExample,
    EngineConfig,
    IdeaDraft,
    IdeationEngine,
    StubProvider,
)
from tradespace.engine.providers import ProviderRequest, ProviderResponse
from tradespace.errors import ParseError, ProviderError, ValidationError
from tradespace.model import DimensionPair, ScoreEntry, ScoreVector

from conftest import build_pairs

WEARABLE_INTENT = "using wearable data to train a multi-agent system for health prediction"


@pytest.fixture
def engine() -> IdeationEngine:
    return IdeationEngine(provider=StubProvider())


def selected_pairs() -> list[DimensionPair]:
    pairs = build_pairs()
    for pair, axis in zip(pairs, "XYZ"):
        pair.axis = axis
        pair.enabled = True
    return pairs


# ---------------------------------------------------------------------------
# Dimension suggestion
# ---------------------------------------------------------------------------


def test_suggest_default_count_is_five(engine):
    pairs = engine.suggest_dimensions(WEARABLE_INTENT)
    assert len(pairs) == 5
    labels = {p.label for p in pairs}
    assert "Complex Models vs Simple Models" in labels
    assert "Data Privacy vs Data Utilization" in labels
    assert "Individual-Centric vs Population-Centric" in labels
    assert "Short-term Monitoring vs Long-term Prediction" in labels
    assert "Single-Device vs Multi-Device" in labels
    # Fresh opaque ids, unselected, disabled.
    for p in pairs:
        assert p.id.startswith("d-")
        assert p.axis is None and p.enabled is False


def test_suggest_generic_intent_covers_classic_tradeoffs(engine):
    pairs = engine.suggest_dimensions(
        "reinforcement learning for user intent prediction"
    )
    labels = {p.label for p in pairs}
    assert "Simple Models vs Complex Models" in labels
    assert "Theory-Driven vs Data-Driven" in labels


def test_suggest_count_bounds(engine):
    assert len(engine.suggest_dimensions(WEARABLE_INTENT, 1)) == 1
    assert len(engine.suggest_dimensions(WEARABLE_INTENT, 10)) == 10
    for bad in (0, 11, -3):
        with pytest.raises(ValidationError):
            engine.suggest_dimensions(WEARABLE_INTENT, bad)
    with pytest.raises(ValidationError):
        engine.suggest_dimensions("   ")


# ---------------------------------------------------------------------------
# Seed generation
# ---------------------------------------------------------------------------


def test_generate_yields_three_fixture_drafts(engine):
    drafts = list(engine.generate_seed_ideas(WEARABLE_INTENT, selected_pairs()))
    assert [d.title for d in drafts] == [
        "Ethical Privacy Framework",
        "Real-Time Sensing Integration",
        "Agent-Based Modeling",
    ]
    assert "federated on-device training" in drafts[0].problem
    assert "sensor data throughput" in drafts[1].problem


def test_generate_requires_selected_dimensions(engine):
    with pytest.raises(ValidationError):
        list(engine.generate_seed_ideas(WEARABLE_INTENT, []))


def test_generate_is_a_generator(engine):
    iterator = engine.generate_seed_ideas(WEARABLE_INTENT, selected_pairs())
    first = next(iterator)
    assert first.title == "Ethical Privacy Framework"
    rest = list(iterator)
    assert len(rest) == 2


def test_generate_generic_intent_distinct_titles(engine):
    drafts = list(
        engine.generate_seed_ideas("program synthesis for spreadsheets", selected_pairs())
    )
    titles = [d.title for d in drafts]
    assert len(set(titles)) == 3
    assert all("program synthesis for spreadsheets" in d.problem for d in drafts)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def test_evaluate_fixture_scores(engine):
    pairs = selected_pairs()
    drafts = list(engine.generate_seed_ideas(WEARABLE_INTENT, pairs))
    vectors = engine.evaluate_ideas(WEARABLE_INTENT, drafts, pairs)
    by_title = dict(zip([d.title for d in drafts], vectors))
    assert by_title["Ethical Privacy Framework"].entries["d-scope"].score == -40
    assert by_title["Real-Time Sensing Integration"].entries["d-scope"].score == 0
    assert by_title["Agent-Based Modeling"].entries["d-complexity"].score == -42
    for vector in vectors:
        assert set(vector.entries) == {"d-complexity", "d-privacy", "d-scope"}
        for entry in vector.entries.values():
            assert -50 <= entry.score <= 50
            assert entry.reasoning


def test_evaluate_respects_corrections_as_calibration(engine):
    pairs = selected_pairs()
    drafts = list(engine.generate_seed_ideas(WEARABLE_INTENT, pairs))
    corrected = engine.evaluate_ideas(
        WEARABLE_INTENT,
        drafts,
        pairs,
        corrections=[
            CorrectionExample(
                idea_title="Agent-Based Modeling",
                dimension_label="Complex Models vs Simple Models",
                old_score=-42,
                new_score=-10,
            )
        ],
    )
    by_title = dict(zip([d.title for d in drafts], corrected))
    assert by_title["Agent-Based Modeling"].entries["d-complexity"].score == -10


def test_evaluate_validates_inputs(engine):
    pairs = selected_pairs()
    with pytest.raises(ValidationError):
        engine.evaluate_ideas(WEARABLE_INTENT, [], pairs)
    draft = IdeaDraft("a", "A", "p")
    with pytest.raises(ValidationError):
        engine.evaluate_ideas(WEARABLE_INTENT, [draft, draft], pairs)
    with pytest.raises(ValidationError):
        engine.evaluate_ideas(WEARABLE_INTENT, [draft], [])


# ---------------------------------------------------------------------------
# Steering
# ---------------------------------------------------------------------------


def fixture_scores(x, y, z):
    return ScoreVector(
        {
            "d-complexity": ScoreEntry(x),
            "d-privacy": ScoreEntry(y),
            "d-scope": ScoreEntry(z),
        }
    )


def test_steer_fixture_rewrite(engine):
    draft = IdeaDraft("agent-based-modeling", "Agent-Based Modeling", "original problem")
    out = engine.steer_idea(
        WEARABLE_INTENT,
        draft,
        fixture_scores(-42, -5, 10),
        fixture_scores(30, 25, 10),
        selected_pairs(),
    )
    assert out.title == "ML Real-Time Processing"
    assert "lightweight" in out.problem


def test_steer_zero_delta_skips_provider(engine):
    calls = []
    original_complete = engine.provider.complete

    def tracking(request):
        calls.append(request)
        return original_complete(request)

    engine.provider.complete = tracking  # type: ignore[method-assign]
    draft = IdeaDraft("a", "A", "p")
    same = fixture_scores(1, 2, 3)
    out = engine.steer_idea(WEARABLE_INTENT, draft, same, same, selected_pairs())
    assert out is draft
    assert calls == []


def test_steer_generic_title_tagged_deterministically(engine):
    draft = IdeaDraft("some-idea", "Some Idea", "does a thing")
    a = engine.steer_idea(
        "sorting networks", draft,
        fixture_scores(0, 0, 0), fixture_scores(10, 0, 0), selected_pairs(),
    )
    b = engine.steer_idea(
        "sorting networks", draft,
        fixture_scores(0, 0, 0), fixture_scores(10, 0, 0), selected_pairs(),
    )
    assert a == b
    assert a.title.startswith("Some Idea (rebalanced ")


# ---------------------------------------------------------------------------
# Merge and fragments
# ---------------------------------------------------------------------------


def test_merge_fixture(engine):
    a = IdeaDraft("ml-real-time-processing", "ML Real-Time Processing", "pa")
    b = IdeaDraft("real-time-sensing-integration", "Real-Time Sensing Integration", "pb")
    merged = engine.merge_ideas(a, b)
    assert merged.title == "Adaptive ML Real-Time Health"
    # Order independent.
    assert engine.merge_ideas(b, a).title == "Adaptive ML Real-Time Health"


def test_merge_generic_concatenates_titles(engine):
    a = IdeaDraft("alpha", "Alpha", "pa")
    b = IdeaDraft("beta", "Beta", "pb")
    merged = engine.merge_ideas(a, b)
    assert merged.title == "Alpha + Beta"
    assert "pa" in merged.problem and "pb" in merged.problem


def test_incorporate_fragment_keeps_text_verbatim(engine):
    idea = IdeaDraft("host", "Host Idea", "host problem")
    out = engine.incorporate_fragment(idea, "federated on-device training")
    assert "federated on-device training" in out.problem
    assert out.title == "Host Idea +frag"
    with pytest.raises(ValidationError):
        engine.incorporate_fragment(idea, "")


# ---------------------------------------------------------------------------
# Retry loop
# ---------------------------------------------------------------------------


class FlakyProvider:
    """Garbage until the Nth call, then delegates to the stub."""

    name = "flaky"

    def __init__(self, fail_times: int):
        self.fail_times = fail_times
        self.calls = 0
        self.users: list[str] = []
        self._stub = StubProvider()

    def complete(self, request: ProviderRequest) -> ProviderResponse:
        self.calls += 1
        self.users.append(request.user)
        if self.calls <= self.fail_times:
            return ProviderResponse("THOUGHT: hmm, no payload here")
        return self._stub.complete(request)


def test_retry_appends_format_reminder_then_succeeds():
    provider = FlakyProvider(fail_times=2)
    engine = IdeationEngine(provider=provider)
    pairs = engine.suggest_dimensions(WEARABLE_INTENT)
    assert len(pairs) == 5
    assert provider.calls == 3
    assert "REMINDER" not in provider.users[0]
    assert "REMINDER" in provider.users[1]
    assert "REMINDER" in provider.users[2]


def test_retry_budget_exhausted_surfaces_parse_error():
    provider = FlakyProvider(fail_times=10)
    engine = IdeationEngine(provider=provider)
    with pytest.raises(ParseError):
        engine.suggest_dimensions(WEARABLE_INTENT)
    assert provider.calls == 3  # 1 + 2 retries


def test_provider_errors_are_not_retried():
    class DeadProvider:
        name = "dead"
        calls = 0

        def complete(self, request):
            self.calls += 1
            raise ProviderError("socket ripped out")

    provider = DeadProvider()
    engine = IdeationEngine(provider=provider)
    with pytest.raises(ProviderError):
        engine.suggest_dimensions(WEARABLE_INTENT)
    assert provider.calls == 1


def test_temperatures_split_by_operation():
    seen = []

    class RecordingProvider:
        name = "rec"

        def __init__(self):
            self._stub = StubProvider()

        def complete(self, request):
            seen.append(request.temperature)
            return self._stub.complete(request)

    engine = IdeationEngine(provider=RecordingProvider())
    pairs = selected_pairs()
    drafts = list(engine.generate_seed_ideas(WEARABLE_INTENT, pairs))
    engine.evaluate_ideas(WEARABLE_INTENT, drafts, pairs)
    config = EngineConfig()
    assert seen[0] == config.generation_temperature
    assert seen[-1] == config.evaluation_temperature


def test_session_limiter_bounds_concurrency():
    engine = IdeationEngine(provider=StubProvider())
    limiter = engine.session_limiter()
    for _ in range(3):
        assert limiter.acquire(blocking=False)
    assert not limiter.acquire(blocking=False)
    for _ in range(3):
        limiter.release()
