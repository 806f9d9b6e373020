"""Error codes and exception types shared across the runtime.

Every exception carries a stable string ``code`` that is mirrored verbatim
in CLI diagnostics, trace details, and gateway stream events, so operator
tooling can match on it without parsing prose.
"""

from __future__ import annotations


class AgoranetError(Exception):
    """Base class; ``code`` is the stable machine-readable identifier."""

    code = "InternalError"

    def __init__(self, detail: str = ""):
        self.detail = detail
        super().__init__(f"{self.code}: {detail}" if detail else self.code)

    def as_dict(self) -> dict:
        return {"code": self.code, "detail": self.detail}


# --- topology parsing / validation ---------------------------------------

class MalformedDocument(AgoranetError):
    code = "MalformedDocument"


class MissingField(AgoranetError):
    code = "MissingField"


class BadValue(AgoranetError):
    code = "BadValue"


class UnknownParent(AgoranetError):
    code = "UnknownParent"

    def __init__(self, agent: str, parent: str):
        self.agent = agent
        self.parent = parent
        super().__init__(f"agent {agent!r} names unknown parent {parent!r}")


class DuplicateName(AgoranetError):
    code = "DuplicateName"


class CycleDetected(AgoranetError):
    code = "CycleDetected"

    def __init__(self, path: list[str]):
        self.path = list(path)
        super().__init__(" -> ".join(self.path))


# --- condition language ----------------------------------------------------

class ConditionParseError(AgoranetError):
    """Syntax error in a role-condition expression."""

    code = "ParseError"

    def __init__(self, position: int, expected: str):
        self.position = position
        self.expected = expected
        super().__init__(f"at {position}: expected {expected}")


# --- bus / runtime -----------------------------------------------------------

class UnknownSender(AgoranetError):
    code = "UnknownSender"


class BudgetExhausted(AgoranetError):
    code = "BudgetExhausted"

    def __init__(self, max_steps: int):
        self.max_steps = max_steps
        super().__init__(f"queue not quiescent after {max_steps} steps")


class NoUpstream(AgoranetError):
    code = "NoUpstream"


class DomainUnavailable(AgoranetError):
    code = "DomainUnavailable"


# --- agora / mediator ------------------------------------------------------

class NotAParticipant(AgoranetError):
    code = "NotAParticipant"


class BoardClosed(AgoranetError):
    code = "BoardClosed"


class NoAgentsAvailable(AgoranetError):
    code = "NoAgentsAvailable"


class RosterCollapsed(AgoranetError):
    code = "RosterCollapsed"


# --- scenario harness --------------------------------------------------------

class MalformedScenario(AgoranetError):
    code = "MalformedScenario"


class DanglingReference(AgoranetError):
    code = "DanglingReference"


# --- gateway ---------------------------------------------------------------

class UnknownSession(AgoranetError):
    code = "UnknownSession"


class EmptyMessage(AgoranetError):
    code = "EmptyMessage"


class NoOutstandingIntegration(AgoranetError):
    code = "NoOutstandingIntegration"


class NotYourBoard(AgoranetError):
    code = "NotYourBoard"


class BadAttributes(AgoranetError):
    code = "BadAttributes"


class UnknownRequest(AgoranetError):
    code = "UnknownRequest"


# Error codes that the digital twin treats as transient: the request is
# stored and resubmitted with backoff instead of failing outright.
DEFERRABLE_CODES = frozenset(
    {"DomainUnavailable", "AllChildrenFailed", "NoAgentsAvailable", "RosterCollapsed"}
)

# Codes that never surface as exceptions but appear in envelopes and the
# humanization table.
ALL_CHILDREN_FAILED = "AllChildrenFailed"
ACL_DENIED_ALL = "AclDeniedAll"
RETRIES_EXHAUSTED = "RetriesExhausted"
UNKNOWN_RECIPIENT = "UnknownRecipient"
UNRESOLVED = "Unresolved"
INTEGRATION_TIMEOUT = "IntegrationTimeout"
NO_MATCHES = "NoMatches"
