"""Shared wiring handed to every agent: bus, registries, options, sinks.

Kept separate from the runtime builder so agent modules don't import each
other in a cycle.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from agoranet.bus import MessageBus, TraceLog
from agoranet.profiles import CapabilityProfile


@dataclass
class RuntimeOptions:
    profile_k: int = 16
    route_threshold: float = 0.15
    recruit_threshold: float = 0.15
    kb_limit: int = 4
    backoff_base: int = 8
    max_attempts: int = 3
    integration_budget: int = 64
    collect_timeout: int = 16
    max_rounds: int = 3
    created_agents: int = 2
    step_budget: int = 10_000


class ProfileRegistry:
    """Announced capability profiles, by agent name."""

    def __init__(self):
        self._profiles: dict[str, CapabilityProfile] = {}
        self._recruitable: set[str] = set()

    def put(self, name: str, profile: CapabilityProfile, recruitable: bool = False):
        self._profiles[name] = profile
        if recruitable:
            self._recruitable.add(name)

    def remove(self, name: str):
        self._profiles.pop(name, None)
        self._recruitable.discard(name)

    def get(self, name: str) -> Optional[CapabilityProfile]:
        return self._profiles.get(name)

    def recruitable(self) -> list[tuple[str, CapabilityProfile]]:
        """Leaf agents a mediator may pull into an agora, sorted by name."""
        return sorted(
            (n, p) for n, p in self._profiles.items() if n in self._recruitable
        )


@dataclass
class RuntimeContext:
    bus: MessageBus
    trace: TraceLog
    options: RuntimeOptions
    profiles: ProfileRegistry
    boards: dict = field(default_factory=dict)  # agora_id -> AgoraBoard
    emit: Callable[[dict], None] = lambda event: None
    spawn_mediator: Optional[Callable[[], str]] = None
    _request_seq: int = 0
    _agora_seq: int = 0
    _instance_seq: dict = field(default_factory=dict)

    def new_request_id(self) -> str:
        self._request_seq += 1
        return f"r{self._request_seq:04d}"

    def new_agora_id(self) -> str:
        self._agora_seq += 1
        return f"agora-{self._agora_seq}"

    def new_instance_name(self, prefix: str) -> str:
        """Created-agent names are never reused within a network's lifetime."""
        n = self._instance_seq.get(prefix, 0) + 1
        self._instance_seq[prefix] = n
        return f"{prefix}-{n}"
