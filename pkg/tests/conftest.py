from __future__ import annotations

import pytest

from tradespace.model import (
    DimensionPair,
    ScoreEntry,
    ScoreVector,
    Session,
    add_dimension_candidates,
    create_session,
    select_dimensions,
)


def build_pairs() -> list[DimensionPair]:
    return [
        DimensionPair(
            id="d-complexity",
            pole_a_name="Complex Models",
            pole_a_description="Rich, expressive architectures with many moving parts.",
            pole_b_name="Simple Models",
            pole_b_description="Lean methods that favour transparency and speed.",
            explanation="How much machinery the approach is willing to carry.",
        ),
        DimensionPair(
            id="d-privacy",
            pole_a_name="Data Privacy",
            pole_a_description="Minimise exposure of personal data.",
            pole_b_name="Data Utilization",
            pole_b_description="Exploit available data as fully as possible.",
            explanation="Whose data gets used, and how much of it.",
        ),
        DimensionPair(
            id="d-scope",
            pole_a_name="Individual-Centric",
            pole_a_description="Model one person at a time.",
            pole_b_name="Population-Centric",
            pole_b_description="Model cohorts and populations.",
            explanation="Granularity of the modelling target.",
        ),
    ]


def make_session(intent: str = "test intent for geometry") -> Session:
    session = create_session(intent)
    add_dimension_candidates(session, build_pairs())
    select_dimensions(
        session,
        [("d-complexity", "X"), ("d-privacy", "Y"), ("d-scope", "Z")],
    )
    return session


def vector(x: int, y: int, z: int) -> ScoreVector:
    return ScoreVector(
        {
            "d-complexity": ScoreEntry(x),
            "d-privacy": ScoreEntry(y),
            "d-scope": ScoreEntry(z),
        }
    )


@pytest.fixture
def session() -> Session:
    return make_session()
