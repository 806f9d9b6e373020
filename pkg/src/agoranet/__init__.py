"""Deterministic hierarchical multi-agent runtime.

Four cooperating agent roles over a tree topology: a per-user twin with
memory and retry, facilitators that decompose questions across child
domain agents and fuse the answers, domain agents gated by attribute
conditions on their knowledge, and ephemeral mediators that run a staged
group protocol on a shared agora board. Every hop is traced.
"""

__version__ = "0.1.0"

from agoranet._kernels import BACKEND as KERNEL_BACKEND  # noqa: F401
