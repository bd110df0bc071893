"""Prefix sequences that bound the number of cheap downward moves.

Heavy vertices are grouped with the light parent above them, the grouped
tree is labeled by recursive centroid splitting, and every vertex gets a
prefix listing the lower-labeled vertices it can "see" in its subtree.
Prepending these prefixes to any sequence assignment caps both the
prefix queries and the light down replies per target at ``2 log2 n``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .strategy import DOWN, QueryTrace
from .tree import SubtreeView, WeightedTree, centroid, components_without

__all__ = [
    "HeavyPartition",
    "Labeling",
    "extended_heavy_parts",
    "label_contracted",
    "extend_labels",
    "build_R",
    "compose",
    "prefix_queries",
    "light_down",
    "min_label_connected",
    "with_prefixes",
]


@dataclass(frozen=True)
class HeavyPartition:
    parts: tuple  # each part: sorted tuple of vertices
    anchors: tuple  # light anchor of each part, None for a part holding the root
    part_of: tuple  # vertex -> part index or None
    contracted: WeightedTree
    node_of: tuple  # vertex -> id in the contracted tree
    members: dict  # contracted id -> tuple of vertices


@dataclass(frozen=True)
class Labeling:
    labels: tuple

    def __getitem__(self, v: int) -> int:
        return self.labels[v]


def extended_heavy_parts(t: WeightedTree, heavy) -> HeavyPartition:
    """Group each maximal connected set of heavy vertices with its light parent.

    Heavy sets that hang below the same light vertex share that vertex and
    end up in one part, so parts stay disjoint.  A heavy set containing the
    root has no anchor.
    """
    comp = [-1] * t.n
    tops = []
    for v in t.preorder:
        if not heavy[v]:
            continue
        p = t.parent[v]
        if p is not None and heavy[p]:
            comp[v] = comp[p]
        else:
            comp[v] = len(tops)
            tops.append(v)
    # one part per anchor; the rootward heavy set gets its own
    part_of: list[Optional[int]] = [None] * t.n
    key_to_part: dict = {}
    parts: list[list[int]] = []
    anchors: list[Optional[int]] = []
    for cid, top in enumerate(tops):
        anchor = t.parent[top]
        key = ("root",) if anchor is None else ("anchor", anchor)
        if key not in key_to_part:
            key_to_part[key] = len(parts)
            parts.append([] if anchor is None else [anchor])
            anchors.append(anchor)
            if anchor is not None:
                part_of[anchor] = key_to_part[key]
        comp_to = key_to_part[key]
        for v in range(t.n):
            if comp[v] == cid:
                parts[comp_to].append(v)
                part_of[v] = comp_to
    # contracted tree: a node per part plus a node per ungrouped vertex
    groups: list[list[int]] = [sorted(p) for p in parts]
    for v in range(t.n):
        if part_of[v] is None:
            groups.append([v])
    order = sorted(range(len(groups)), key=lambda g: groups[g][0])
    gid_new = {g: i for i, g in enumerate(order)}
    node_of = [0] * t.n
    for g, vs in enumerate(groups):
        for v in vs:
            node_of[v] = gid_new[g]
    m = len(groups)
    parent: list[Optional[int]] = [None] * m
    weight = [Fraction(0)] * m
    members = {}
    for g, vs in enumerate(groups):
        i = gid_new[g]
        members[i] = tuple(vs)
        weight[i] = min(t.weight[v] for v in vs)
        top = min(vs, key=lambda v: t.depth[v])
        p = t.parent[top]
        parent[i] = None if p is None else node_of[p]
    tc = WeightedTree.from_parents(parent, weight)
    return HeavyPartition(
        tuple(tuple(sorted(p)) for p in parts),
        tuple(anchors),
        tuple(part_of),
        tc,
        tuple(node_of),
        members,
    )


def label_contracted(tc: WeightedTree, start: int = 1) -> Labeling:
    """Centroid gets ``start``; each remaining component is labeled from ``start + 1``."""
    labels = [0] * tc.n
    stack = [(frozenset(range(tc.n)), tc.root, start)]
    while stack:
        members, root, i = stack.pop()
        z = centroid(SubtreeView(tc, members, root))
        labels[z] = i
        for comp in components_without(tc, members, z):
            croot = min(comp, key=lambda v: (tc.depth[v], v))
            stack.append((comp, croot, i + 1))
    return Labeling(tuple(labels))


def extend_labels(hp: HeavyPartition, lab: Labeling) -> Labeling:
    """Every vertex inherits the label of its contracted node."""
    return Labeling(tuple(lab[hp.node_of[v]] for v in range(len(hp.node_of))))


def build_R(t: WeightedTree, lab: Labeling) -> tuple:
    """``R(v)``: vertices below ``v`` with a smaller label than ``v`` and than every vertex between.

    Sorted by label; labels inside one ``R(v)`` are distinct.
    """
    L = lab.labels
    out = []
    for v in range(t.n):
        found = []
        # (vertex, smallest label strictly between v and it)
        stack = [(ch, None) for ch in t.children[v]]
        while stack:
            u, between = stack.pop()
            lu = L[u]
            if lu < L[v] and (between is None or between > lu):
                found.append(u)
            inner = lu if between is None else min(between, lu)
            if inner <= 1:
                # nothing further down can have a label below 1
                continue
            for ch in t.children[u]:
                stack.append((ch, inner))
        found.sort(key=lambda u: L[u])
        labs = [L[u] for u in found]
        if len(set(labs)) != len(labs):
            raise AssertionError(f"R({v}) repeats a label: {labs}")
        out.append(tuple(found))
    return tuple(out)


def compose(R, S) -> tuple:
    """Per-vertex concatenation ``R(v) + S(v)``."""
    if len(R) != len(S):
        raise ValueError("assignments cover different vertex counts")
    return tuple(tuple(r) + tuple(s) for r, s in zip(R, S))


def prefix_queries(trace: QueryTrace, R) -> int:
    """Queries in ``trace`` that came from a prefix ``R(owner)``."""
    return sum(1 for st in trace.steps if 0 <= st.index < len(R[st.owner]))


def light_down(t: WeightedTree, trace: QueryTrace, threshold) -> int:
    """Down replies on vertices of weight at most ``threshold``."""
    return sum(1 for st in trace.steps if st.reply == DOWN and t.weight[st.vertex] <= threshold)


def min_label_connected(t: WeightedTree, lab: Labeling, members) -> bool:
    """Whether the minimum-label vertices of a connected view form a connected set."""
    L = lab.labels
    low = min(L[v] for v in members)
    sel = {v for v in members if L[v] == low}
    start = next(iter(sel))
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for y in t.adjacency[u]:
            if y in sel and y not in seen:
                seen.add(y)
                stack.append(y)
    return len(seen) == len(sel)


def with_prefixes(t: WeightedTree, S, threshold) -> tuple:
    """``(S_plus, R, labels, partition)`` for a sequence assignment ``S``.

    Vertices heavier than ``threshold`` are grouped into extended heavy parts.
    """
    heavy = [w > threshold for w in t.weight]
    hp = extended_heavy_parts(t, heavy)
    lab = extend_labels(hp, label_contracted(hp.contracted))
    R = build_R(t, lab)
    return compose(R, S), R, lab, hp
