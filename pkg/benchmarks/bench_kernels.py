"""Benchmark the lexical kernels: compiled extension vs pure Python.

These loops sit under every capability profile, routing decision, and
knowledge-base query, so they are the one place where a compiled core
pays off. Run:

    python3 benchmarks/bench_kernels.py [--docs 4000] [--queries 20000]
"""

from __future__ import annotations

import argparse
import random
import time

from agoranet import text
from agoranet._kernels import pure

try:
    from agoranet._kernels import _speedups
except ImportError:
    _speedups = None

VOCAB = (
    "salary benefits compensation candidate resume experience education "
    "references policy onboarding payroll annual bonus insurance vouchers "
    "position opening analyst statement the and for with from what which"
).split()


def corpus(n_docs: int, seed: int = 7) -> list[str]:
    rng = random.Random(seed)
    return [
        " ".join(rng.choice(VOCAB) for _ in range(rng.randint(8, 40)))
        for _ in range(n_docs)
    ]


def bench(backend, docs: list[str], queries: int) -> dict[str, float]:
    timings = {}

    start = time.perf_counter()
    token_lists = [backend.tokenize(d, text.STOPWORDS, 2) for d in docs]
    timings["tokenize"] = time.perf_counter() - start

    start = time.perf_counter()
    counted = [backend.count_terms(toks) for toks in token_lists]
    timings["count_terms"] = time.perf_counter() - start

    profiles = []
    for counts in counted:
        ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:16]
        peak = ranked[0][1] if ranked else 1
        profiles.append(([t for t, _ in ranked], [c / peak for _, c in ranked]))

    rng = random.Random(21)
    token_sets = [set(toks) for toks in token_lists]
    start = time.perf_counter()
    for _ in range(queries):
        terms, weights = profiles[rng.randrange(len(profiles))]
        backend.weighted_overlap(terms, weights,
                                 token_sets[rng.randrange(len(token_sets))])
    timings["weighted_overlap"] = time.perf_counter() - start

    start = time.perf_counter()
    for i in range(0, len(profiles) - 4, 4):
        backend.merge_weights(profiles[i:i + 4])
    timings["merge_weights"] = time.perf_counter() - start

    timings["total"] = sum(timings.values())
    return timings


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--docs", type=int, default=4000)
    parser.add_argument("--queries", type=int, default=20_000)
    args = parser.parse_args()

    docs = corpus(args.docs)
    rows = [("pure", bench(pure, docs, args.queries))]
    if _speedups is not None:
        rows.append(("compiled", bench(_speedups, docs, args.queries)))
    else:
        print("compiled kernels not built; showing pure only")

    names = ["tokenize", "count_terms", "weighted_overlap", "merge_weights", "total"]
    header = f"{'kernel':18}" + "".join(f"{b + ' (ms)':>14}" for b, _ in rows)
    if len(rows) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for name in names:
        line = f"{name:18}"
        for _, timing in rows:
            line += f"{timing[name] * 1000:14.1f}"
        if len(rows) == 2:
            line += f"{rows[0][1][name] / max(rows[1][1][name], 1e-9):9.2f}x"
        print(line)


if __name__ == "__main__":
    main()
