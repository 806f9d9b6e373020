"""Capability profiles: what an agent announces upward about itself.

A profile is a truncated weighted-term summary of the agent's declared
description and example questions. Parents merge their children's profiles
and re-announce the merged summary, layer by layer, so each node knows the
key topics below it without holding the details.
"""

from __future__ import annotations

from dataclasses import dataclass

from agoranet import _kernels, text
from agoranet.topology import AgentDecl

DEFAULT_PROFILE_K = 16


@dataclass(frozen=True)
class CapabilityProfile:
    owner: str
    terms: tuple[tuple[str, float], ...] = ()

    @property
    def term_list(self) -> list[str]:
        return [t for t, _ in self.terms]

    @property
    def weight_list(self) -> list[float]:
        return [w for _, w in self.terms]

    def total_weight(self) -> float:
        return sum(w for _, w in self.terms)


def _top_k_normalized(weights: dict[str, float], owner: str, k: int) -> CapabilityProfile:
    ranked = sorted(weights.items(), key=lambda kv: (-kv[1], kv[0]))[:k]
    if not ranked:
        return CapabilityProfile(owner=owner, terms=())
    peak = ranked[0][1]
    return CapabilityProfile(
        owner=owner,
        terms=tuple((term, weight / peak) for term, weight in ranked),
    )


def build_capability_profile(decl: AgentDecl, k: int = DEFAULT_PROFILE_K) -> CapabilityProfile:
    """Top-``k`` term-frequency profile of a declaration's text."""
    corpus = " ".join([decl.description, *decl.example_questions])
    counts = text.term_counts(corpus)
    return _top_k_normalized({t: float(c) for t, c in counts.items()}, decl.name, k)


def summarize_children(
    profiles: list[CapabilityProfile], owner: str, k: int = DEFAULT_PROFILE_K
) -> CapabilityProfile:
    """Merge child profiles into the summary the parent announces upward."""
    if not profiles:
        raise ValueError("summarize_children requires at least one profile")
    merged = _kernels.merge_weights(
        [(p.term_list, p.weight_list) for p in profiles]
    )
    return _top_k_normalized(merged, owner, k)


def profile_to_body(profile: CapabilityProfile) -> dict:
    """Envelope-body form of a profile (announcements are plain JSON)."""
    return {"owner": profile.owner, "terms": [[t, w] for t, w in profile.terms]}


def profile_from_body(body: dict) -> CapabilityProfile:
    return CapabilityProfile(
        owner=body["owner"],
        terms=tuple((t, float(w)) for t, w in body["terms"]),
    )
