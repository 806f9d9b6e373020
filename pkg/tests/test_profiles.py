"""Capability profiles: build, summarize, and their invariants."""

from __future__ import annotations

import random

from agoranet.profiles import (
    build_capability_profile,
    profile_from_body,
    profile_to_body,
    summarize_children,
)
from agoranet.topology import AgentDecl, parse_topology


def _decl(description, questions=(), name="agent"):
    return AgentDecl(name=name, parent="fac", description=description,
                     example_questions=tuple(questions))


def test_hand_counted_frequencies():
    # oracle: "salary" x2, "benefits" x1, normalized to the max
    profile = build_capability_profile(_decl("salary salary benefits"), k=2)
    assert profile.terms == (("salary", 1.0), ("benefits", 0.5))


def test_reference_hr_profile_top_terms(listing1_text):
    cfg = parse_topology(listing1_text)
    hr = cfg.domains[0].agents[0]
    profile = build_capability_profile(hr)
    terms = dict(profile.terms)
    for expected in ("salary", "benefits", "compensation", "hr"):
        assert expected in terms
    assert terms["salary"] == 1.0  # most frequent term

def test_empty_declaration_gives_empty_profile():
    profile = build_capability_profile(_decl("", ()))
    assert profile.terms == ()


def test_truncation_and_ordering():
    profile = build_capability_profile(
        _decl("zebra zebra zebra apple apple mango mango banana"), k=3
    )
    # weight desc, then term asc on ties
    assert [t for t, _ in profile.terms] == ["zebra", "apple", "mango"]


def test_profile_deterministic(listing1_text):
    cfg = parse_topology(listing1_text)
    decl = cfg.domains[1].agents[0]
    assert build_capability_profile(decl) == build_capability_profile(decl)


def test_summarize_contains_both_families(listing1_text):
    """Merge oracle: the parent's summary spans both children's key terms."""
    cfg = parse_topology(listing1_text)
    hr = build_capability_profile(cfg.domains[0].agents[0])
    cv = build_capability_profile(cfg.domains[1].agents[0])
    summary = summarize_children([hr, cv], owner="facilitator")
    terms = {t for t, _ in summary.terms}
    assert "salary" in terms
    assert "resume" in terms
    assert summary.owner == "facilitator"


def test_summarize_single_child_is_identity():
    profile = build_capability_profile(_decl("salary salary benefits"), k=4)
    summary = summarize_children([profile], owner="parent", k=4)
    assert summary.terms == profile.terms
    assert summary.owner == "parent"


def test_summarize_disjoint_budget():
    a = build_capability_profile(_decl("alpha beta gamma delta"), k=4)
    b = build_capability_profile(_decl("epsilon zeta theta kappa"), k=4)
    summary = summarize_children([a, b], owner="p", k=4)
    assert len(summary.terms) == 4


def test_summarize_monotone():
    """Every summary term appears in at least one child profile."""
    rng = random.Random(5)
    words = "alpha beta gamma delta epsilon zeta eta theta iota".split()
    for _ in range(50):
        children = []
        for i in range(rng.randint(1, 4)):
            text = " ".join(rng.choice(words) for _ in range(rng.randint(1, 12)))
            children.append(build_capability_profile(_decl(text, name=f"c{i}"), k=5))
        summary = summarize_children(children, owner="p", k=5)
        child_terms = {t for c in children for t, _ in c.terms}
        assert {t for t, _ in summary.terms} <= child_terms


def test_body_round_trip(listing1_text):
    cfg = parse_topology(listing1_text)
    profile = build_capability_profile(cfg.domains[0].agents[0])
    assert profile_from_body(profile_to_body(profile)) == profile
