"""Deterministic instance generators."""

from __future__ import annotations

import random
from fractions import Fraction

import networkx as nx

from .tree import EdgeWeightedTree, WeightedTree

__all__ = ["KINDS", "WEIGHT_MODELS", "generate", "random_weights", "random_edge_tree", "parents_from_edges"]

KINDS = ("path", "star", "spider", "caterpillar", "random")
WEIGHT_MODELS = ("unit", "uniform", "heavytail")
_DEN = 1 << 16


def random_weights(n: int, model: str, rng: random.Random) -> list[Fraction]:
    if model == "unit":
        return [Fraction(1)] * n
    if model == "uniform":
        return [Fraction(rng.randint(1, _DEN), _DEN) for _ in range(n)]
    if model == "heavytail":
        return [Fraction(max(1, int(_DEN * rng.random() ** 4)), _DEN) for _ in range(n)]
    raise ValueError(f"unknown weight model {model!r}")


def parents_from_edges(n: int, edges, root: int = 0) -> list:
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    parent: list = [None] * n
    seen = [False] * n
    seen[root] = True
    order = [root]
    for u in order:
        for y in sorted(adj[u]):
            if not seen[y]:
                seen[y] = True
                parent[y] = u
                order.append(y)
    return parent


def _random_parents(n: int, rng: random.Random) -> list:
    if n <= 2:
        return [None] + [0] * (n - 1)
    seq = [rng.randrange(n) for _ in range(n - 2)]
    g = nx.from_prufer_sequence(seq)
    return parents_from_edges(n, g.edges())


def _topology(kind: str, n: int, rng: random.Random) -> list:
    if kind == "path":
        return [None] + list(range(n - 1))
    if kind == "star":
        return [None] + [0] * (n - 1)
    if kind == "spider":
        # centre 0 with legs of random lengths
        legs = max(1, min(n - 1, rng.randint(3, 5))) if n > 1 else 0
        parent: list = [None]
        ends = []
        for v in range(1, n):
            leg = (v - 1) % legs if legs else 0
            if leg < len(ends):
                parent.append(ends[leg])
                ends[leg] = v
            else:
                parent.append(0)
                ends.append(v)
        return parent
    if kind == "caterpillar":
        spine = max(1, (n + 1) // 2)
        parent = [None] + list(range(spine - 1))
        for _ in range(spine, n):
            parent.append(rng.randrange(spine))
        return parent
    if kind == "random":
        return _random_parents(n, rng)
    raise ValueError(f"unknown tree kind {kind!r}")


def generate(kind: str, n: int, weights: str = "unit", seed: int = 0) -> WeightedTree:
    """Tree of the given shape; identical arguments give identical trees."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = random.Random(f"{kind}/{n}/{weights}/{seed}")
    parent = _topology(kind, n, rng)
    return WeightedTree.from_parents(parent, random_weights(n, weights, rng))


def random_edge_tree(n: int, seed: int, max_den: int = 8) -> EdgeWeightedTree:
    """Random topology with small random rational edge weights."""
    rng = random.Random(f"etree/{n}/{seed}")
    parent = _random_parents(n, rng)
    weight = [Fraction(0)] + [
        Fraction(rng.randint(1, max_den), rng.randint(1, max_den)) for _ in range(n - 1)
    ]
    return EdgeWeightedTree.from_parents(parent, weight)
