"""Exact optimal search costs for small trees, weighted paths and the edge variant."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm

from . import kernels
from .tree import EdgeWeightedTree, WeightedTree

__all__ = [
    "CapExceeded",
    "OptResult",
    "opt_oracle",
    "path_opt",
    "path_order",
    "edge_opt_oracle",
    "policy_chooser",
]

DEFAULT_CAP = 14
DEFAULT_EDGE_CAP = 13


class CapExceeded(ValueError):
    """Instance is larger than the exhaustive solver accepts."""


@dataclass
class OptResult:
    value: Fraction
    # canonical view (sorted vertex tuple) -> optimal first query
    policy: dict


def _common_denominator(ws) -> int:
    d = 1
    for w in ws:
        d = lcm(d, Fraction(w).denominator)
    return d


def _mask_to_view(mask: int) -> tuple:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def opt_oracle(t: WeightedTree, cap: int = DEFAULT_CAP) -> OptResult:
    """OPT by exhaustive game search over connected remaining trees."""
    if t.n > cap:
        raise CapExceeded(f"opt_oracle: n = {t.n} exceeds cap {cap}")
    d = _common_denominator(t.weight)
    ints = [int(w * d) for w in t.weight]
    adj = [sum(1 << u for u in t.adjacency[v]) for v in range(t.n)]
    full = (1 << t.n) - 1
    value, choice = kernels.opt_masks(adj, ints, full)
    policy = {_mask_to_view(m): v for m, v in choice.items()}
    return OptResult(Fraction(value[full], d), policy)


def policy_chooser(result: OptResult):
    """Chooser for :func:`treesearch.strategy.explore` replaying an oracle policy."""

    def choose(members, root):
        return result.policy[tuple(sorted(members))]

    return choose


def path_order(t: WeightedTree) -> list[int]:
    """Vertices of a path tree from one end to the other (smaller end id first)."""
    if any(t.degree(v) > 2 for v in range(t.n)):
        raise ValueError("not a path: some vertex has degree > 2")
    if t.n == 1:
        return [t.root]
    ends = [v for v in range(t.n) if t.degree(v) == 1]
    order = [min(ends)]
    prev = None
    while len(order) < t.n:
        cur = order[-1]
        nxt = [u for u in t.adjacency[cur] if u != prev]
        prev = cur
        order.append(nxt[0])
    return order


def path_opt(t: WeightedTree) -> OptResult:
    """Optimal strategy for a weighted path by interval DP over subpaths."""
    order = path_order(t)
    d = _common_denominator(t.weight)
    ints = [int(t.weight[v] * d) for v in order]
    opt, arg = kernels.path_dp(ints)
    k = len(order)
    policy = {}
    for i in range(k):
        for j in range(i + 1, k):
            policy[tuple(sorted(order[i : j + 1]))] = order[arg[i][j]]
    return OptResult(Fraction(opt[0][k - 1], d), policy)


def edge_opt_oracle(t: EdgeWeightedTree, cap: int = DEFAULT_EDGE_CAP) -> Fraction:
    """OPT of the edge variant: each query names an edge and learns the side."""
    edges = t.edges()
    if len(edges) > cap:
        raise CapExceeded(f"edge_opt_oracle: {len(edges)} edges exceeds cap {cap}")
    d = _common_denominator(w for _, _, w in edges)
    adj = [0] * t.n
    for v, p, _ in edges:
        adj[v] |= 1 << p
        adj[p] |= 1 << v
    memo: dict[int, int] = {}

    def side(mask: int, start: int, cut: tuple) -> int:
        comp = 1 << start
        frontier = comp
        while frontier:
            grow = 0
            f = frontier
            while f:
                low = f & -f
                u = low.bit_length() - 1
                nb = adj[u] & mask
                if u == cut[0]:
                    nb &= ~(1 << cut[1])
                elif u == cut[1]:
                    nb &= ~(1 << cut[0])
                grow |= nb
                f ^= low
            grow &= ~comp
            comp |= grow
            frontier = grow
        return comp

    def solve(mask: int) -> int:
        if mask & (mask - 1) == 0:
            return 0
        if mask in memo:
            return memo[mask]
        best = None
        for v, p, w in edges:
            if not (mask >> v) & 1 or not (mask >> p) & 1:
                continue
            a = side(mask, v, (v, p))
            cand = int(w * d) + max(solve(a), solve(mask & ~a))
            if best is None or cand < best:
                best = cand
        memo[mask] = best
        return best

    return Fraction(solve((1 << t.n) - 1), d)
