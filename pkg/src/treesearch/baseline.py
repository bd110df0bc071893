"""Centroid halving: query the centroid of whatever remains."""

from __future__ import annotations

from .strategy import DOWN, FOUND, UP, QueryStep, QueryTrace, explore
from .tree import SubtreeView, WeightedTree, centroid, components_without

__all__ = ["centroid_chooser", "centroid_strategy_execute", "centroid_traces"]


def centroid_chooser(t: WeightedTree):
    def choose(members, root):
        return centroid(SubtreeView(t, members, root))

    return choose


def centroid_strategy_execute(t: WeightedTree, x: int) -> QueryTrace:
    """Trace of the centroid strategy against target ``x``.

    Each query at least halves the remaining tree, so a target is found
    after at most ``ceil(log2 n)`` queries.
    """
    members = frozenset(range(t.n))
    root = t.root
    trace = QueryTrace(x)
    while len(members) > 1:
        q = centroid(SubtreeView(t, members, root))
        cost = trace.cost + t.weight[q]
        if q == x:
            trace.steps.append(QueryStep(q, FOUND, cost))
            break
        down = t.is_ancestor(q, x)
        trace.steps.append(QueryStep(q, DOWN if down else UP, cost))
        for comp in components_without(t, members, q):
            if x in comp:
                members = comp
                break
        if down:
            root = t.step_towards(q, x)
    return trace


def centroid_traces(t: WeightedTree) -> dict[int, QueryTrace]:
    """Traces for every target at once."""
    return explore(t, centroid_chooser(t))

