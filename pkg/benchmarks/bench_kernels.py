"""Compiled vs pure-Python kernels on identical inputs.

Each kernel is timed on inputs taken from real DP runs, then the full
omega sweep is timed once per backend in a fresh interpreter (the backend
is fixed at import time).

    python3 benchmarks/bench_kernels.py [--repeat 3]
"""

from __future__ import annotations

import argparse
import itertools
import os
import random
import subprocess
import sys
import timeit

from treesearch import _pykernels as py
from treesearch.gen import generate
from treesearch.qptas import RoundingParams, build_strategy, default_L, omega_sweep, round_weights
from treesearch.tree import normalize

try:
    from treesearch import _ckernels as ck
except ImportError:
    sys.exit("the compiled extension is not built; run `pip install -e . --no-build-isolation`")

SWEEP_SNIPPET = """
import time
from treesearch import kernels
from treesearch.gen import generate
from treesearch.qptas import default_L, omega_sweep
from treesearch.tree import normalize
t0 = time.perf_counter()
for seed in range(12):
    t = normalize(generate("random", 7, "uniform", seed))
    omega_sweep(t, 2, default_L(2, 7))
print(kernels.BACKEND, time.perf_counter() - t0)
"""


def best_of(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def dp_inputs():
    """The largest child state set and merged set from a mid-sized DP run."""
    t = normalize(generate("random", 8, "uniform", 4))
    p, _ = omega_sweep(t, 2, default_L(2, 8))
    rt = round_weights(t, p)
    tables = build_strategy(rt)
    v = max(range(t.n), key=lambda u: len(tables.final[u]) if t.parent[u] is not None else -1)
    parent = t.parent[v]
    levels = tables.merge_levels(parent)
    # keep the merge-by-merge case affordable for the pure-Python side
    merged = dict(itertools.islice(levels[-1].items(), 800))
    heavy_w = max(rt.slots)
    return p, tables.final[v], merged, rt.slots[v], heavy_w


def oracle_inputs(n=13):
    rng = random.Random(0)
    parent = [None] + [rng.randrange(v) for v in range(1, n)]
    adj = [0] * n
    for v in range(1, n):
        adj[v] |= 1 << parent[v]
        adj[parent[v]] |= 1 << v
    return adj, [rng.randint(1, 1000) for _ in range(n)], (1 << n) - 1


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    p, child, merged, w, heavy_w = dp_inputs()
    a, L = p.a, p.L
    zero = {(bytes(L), bytes(L), False): None}
    adj, weights, full = oracle_inputs()
    pw = [random.Random(1).randint(1, 1000) for _ in range(200)]
    cases = [
        (f"merge_level ({len(child)} child states)", lambda m: m.merge_level(zero, child, a, 10**7)),
        (f"merge_level ({len(merged)} x {len(child)})", lambda m: m.merge_level(merged, child, a, 10**7)),
        (f"insert_level light ({len(merged)} states)", lambda m: m.insert_level(merged, w, False, a, L, 10**7)),
        (f"insert_level heavy ({len(merged)} states)", lambda m: m.insert_level(merged, heavy_w, True, a, L, 10**7)),
        ("opt_masks (n=13)", lambda m: m.opt_masks(adj, weights, full)),
        ("path_dp (200 vertices)", lambda m: m.path_dp(pw)),
    ]
    print(f"{'kernel':<40} {'python s':>10} {'cython s':>10} {'speedup':>8}")
    for name, fn in cases:
        assert fn(py) == fn(ck), name
        tp = best_of(lambda: fn(py), args.repeat)
        tc = best_of(lambda: fn(ck), args.repeat)
        print(f"{name:<40} {tp:>10.4f} {tc:>10.4f} {tp / tc:>7.1f}x")

    print()
    print("full omega sweep, 12 random trees n=7, c=2:")
    for pure in (True, False):
        env = dict(os.environ)
        env.pop("TREESEARCH_PURE_PYTHON", None)
        if pure:
            env["TREESEARCH_PURE_PYTHON"] = "1"
        out = subprocess.run(
            [sys.executable, "-c", SWEEP_SNIPPET], env=env, capture_output=True, text=True, check=True
        ).stdout.split()
        print(f"  {out[0]:<8} {float(out[1]):.3f} s")


if __name__ == "__main__":
    main()
