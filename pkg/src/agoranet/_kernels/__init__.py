"""Kernel backend selection.

Imports the compiled lexical kernels when available, else the pure-Python
fallback. Set ``AGORANET_PURE=1`` to force the fallback (used by the
parity tests and the benchmark).
"""

from __future__ import annotations

import os

if os.environ.get("AGORANET_PURE"):
    from agoranet._kernels.pure import (  # noqa: F401
        BACKEND,
        count_terms,
        fold_ascii,
        merge_weights,
        tokenize,
        weighted_overlap,
    )
else:
    try:
        from agoranet._kernels._speedups import (  # noqa: F401
            BACKEND,
            count_terms,
            fold_ascii,
            merge_weights,
            tokenize,
            weighted_overlap,
        )
    except ImportError:
        from agoranet._kernels.pure import (  # noqa: F401
            BACKEND,
            count_terms,
            fold_ascii,
            merge_weights,
            tokenize,
            weighted_overlap,
        )

__all__ = [
    "BACKEND",
    "count_terms",
    "fold_ascii",
    "merge_weights",
    "tokenize",
    "weighted_overlap",
]
