"""Rooted node-weighted trees.

Vertex ids are dense integers ``0..n-1`` and never change; every transform
that builds a new tree returns an explicit id map.  Weights are
:class:`fractions.Fraction` throughout.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Optional, Sequence

__all__ = [
    "TreeError",
    "WeightedTree",
    "EdgeWeightedTree",
    "SubtreeView",
    "parse_rational",
    "format_rational",
    "parse_tree",
    "serialize_tree",
    "parse_edge_tree",
    "serialize_edge_tree",
    "normalize",
    "reduce_edge_variant",
    "contract_chains",
    "remaining_subtree",
    "components_without",
    "centroid",
]


class TreeError(ValueError):
    """Malformed tree input; carries the offending line number when known."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def parse_rational(text: str) -> Fraction:
    """Parse ``p/q`` or a decimal literal exactly."""
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a rational number: {text!r}") from exc


def format_rational(x: Fraction) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def _build_children(n: int, parent: Sequence[Optional[int]]) -> tuple[tuple[int, ...], ...]:
    kids: list[list[int]] = [[] for _ in range(n)]
    for v, p in enumerate(parent):
        if p is not None:
            kids[p].append(v)
    return tuple(tuple(k) for k in kids)


@dataclass(frozen=True)
class WeightedTree:
    n: int
    root: int
    parent: tuple[Optional[int], ...]
    children: tuple[tuple[int, ...], ...]
    weight: tuple[Fraction, ...]

    @classmethod
    def from_parents(
        cls, parent: Sequence[Optional[int]], weight: Iterable
    ) -> "WeightedTree":
        """Build and validate a tree from a parent array (``None`` marks the root)."""
        parent = tuple(None if p is None else int(p) for p in parent)
        weight = tuple(Fraction(w) for w in weight)
        n = len(parent)
        if n == 0:
            raise TreeError("empty tree")
        if len(weight) != n:
            raise TreeError("parent and weight arrays differ in length")
        roots = [v for v, p in enumerate(parent) if p is None]
        if len(roots) != 1:
            raise TreeError(f"expected exactly one root, found {len(roots)}")
        for v, p in enumerate(parent):
            if p is not None and not 0 <= p < n:
                raise TreeError(f"vertex {v} has unknown parent {p}")
        for v, w in enumerate(weight):
            if w < 0:
                raise TreeError(f"vertex {v} has negative weight {w}")
        children = _build_children(n, parent)
        _check_reachable(n, roots[0], children)
        return cls(n, roots[0], parent, children, weight)

    def degree(self, v: int) -> int:
        return len(self.children[v]) + (self.parent[v] is not None)

    def neighbors(self, v: int) -> tuple[int, ...]:
        p = self.parent[v]
        return self.children[v] if p is None else (p,) + self.children[v]

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        return tuple(self.neighbors(v) for v in range(self.n))

    @cached_property
    def preorder(self) -> tuple[int, ...]:
        order = []
        stack = [self.root]
        while stack:
            v = stack.pop()
            order.append(v)
            stack.extend(reversed(self.children[v]))
        return tuple(order)

    @cached_property
    def depth(self) -> tuple[int, ...]:
        d = [0] * self.n
        for v in self.preorder:
            p = self.parent[v]
            if p is not None:
                d[v] = d[p] + 1
        return tuple(d)

    @cached_property
    def subtree_size(self) -> tuple[int, ...]:
        size = [1] * self.n
        for v in reversed(self.preorder):
            p = self.parent[v]
            if p is not None:
                size[p] += size[v]
        return tuple(size)

    @cached_property
    def _tin(self) -> tuple[int, ...]:
        tin = [0] * self.n
        for i, v in enumerate(self.preorder):
            tin[v] = i
        return tuple(tin)

    def is_ancestor(self, u: int, v: int) -> bool:
        """True when ``u`` lies on the root path of ``v`` (``u == v`` included)."""
        tu = self._tin[u]
        return tu <= self._tin[v] < tu + self.subtree_size[u]

    def child_towards(self, u: int, v: int) -> int:
        """The child of ``u`` whose subtree contains the proper descendant ``v``."""
        while self.parent[v] != u:
            v = self.parent[v]
        return v

    def step_towards(self, u: int, x: int) -> int:
        """Neighbor of ``u`` on the path to ``x`` (``x != u``)."""
        if self.is_ancestor(u, x):
            kids = self.children[u]
            tin = self._tin
            # children are visited in order, so their tin values increase
            lo, hi = 0, len(kids) - 1
            tx = tin[x]
            while lo < hi:
                mid = (lo + hi + 1) // 2
                if tin[kids[mid]] <= tx:
                    lo = mid
                else:
                    hi = mid - 1
            return kids[lo]
        return self.parent[u]

    def path(self, u: int, v: int) -> list[int]:
        """Vertices on the ``u``-``v`` path, endpoints included, in order."""
        left, right = [u], [v]
        a, b = u, v
        depth = self.depth
        while depth[a] > depth[b]:
            a = self.parent[a]
            left.append(a)
        while depth[b] > depth[a]:
            b = self.parent[b]
            right.append(b)
        while a != b:
            a = self.parent[a]
            b = self.parent[b]
            left.append(a)
            right.append(b)
        right.pop()
        return left + right[::-1]

    def subtree(self, v: int) -> list[int]:
        out = []
        stack = [v]
        while stack:
            u = stack.pop()
            out.append(u)
            stack.extend(self.children[u])
        return out

    def with_weights(self, weight: Iterable) -> "WeightedTree":
        weight = tuple(Fraction(w) for w in weight)
        if len(weight) != self.n:
            raise TreeError("weight vector has the wrong length")
        return WeightedTree(self.n, self.root, self.parent, self.children, weight)

    def induced(self, members: Iterable[int]) -> tuple["WeightedTree", list[int]]:
        """Relabel a connected vertex set as a standalone tree.

        Returns the new tree and ``old`` with ``old[new_id] = original id``;
        new ids follow increasing original ids.
        """
        old = sorted(set(members))
        new = {v: i for i, v in enumerate(old)}
        parent = []
        for v in old:
            p = self.parent[v]
            parent.append(new[p] if p in new else None)
        tree = WeightedTree.from_parents(parent, [self.weight[v] for v in old])
        return tree, old

    def view(self) -> "SubtreeView":
        return SubtreeView(self, frozenset(range(self.n)), self.root)


def _check_reachable(n: int, root: int, children) -> None:
    seen = 0
    stack = [root]
    visited = [False] * n
    while stack:
        v = stack.pop()
        if visited[v]:
            raise TreeError(f"cycle through vertex {v}")
        visited[v] = True
        seen += 1
        stack.extend(children[v])
    if seen != n:
        bad = min(v for v in range(n) if not visited[v])
        raise TreeError(f"vertex {bad} is not reachable from the root (cycle)")


@dataclass(frozen=True)
class EdgeWeightedTree:
    """Tree with weights on edges; ``weight[v]`` is the weight of edge ``(v, parent[v])``."""

    n: int
    root: int
    parent: tuple[Optional[int], ...]
    children: tuple[tuple[int, ...], ...]
    weight: tuple[Optional[Fraction], ...]

    @classmethod
    def from_parents(cls, parent: Sequence[Optional[int]], weight: Sequence) -> "EdgeWeightedTree":
        shape = WeightedTree.from_parents(parent, [0] * len(parent))
        ws = []
        for v, p in enumerate(shape.parent):
            if p is None:
                ws.append(None)
            else:
                w = Fraction(weight[v])
                if w < 0:
                    raise TreeError(f"edge ({v}, {p}) has negative weight")
                ws.append(w)
        return cls(shape.n, shape.root, shape.parent, shape.children, tuple(ws))

    def edges(self) -> list[tuple[int, int, Fraction]]:
        """``(child, parent, weight)`` triples in child-id order."""
        return [(v, p, self.weight[v]) for v, p in enumerate(self.parent) if p is not None]


@dataclass(frozen=True)
class SubtreeView:
    origin: WeightedTree
    members: frozenset
    root: int

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, v: int) -> bool:
        return v in self.members


# ---------------------------------------------------------------- file format


def _lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def parse_tree(text: str) -> WeightedTree:
    """Parse the ``tree``/``node`` line format."""
    rows = list(_lines(text))
    if not rows:
        raise TreeError("empty input")
    lineno, head = rows[0]
    if len(head) != 3 or head[0] != "tree":
        raise TreeError("expected header 'tree <n> <root_id>'", lineno)
    try:
        n, root = int(head[1]), int(head[2])
    except ValueError:
        raise TreeError("non-integer in header", lineno) from None
    if n < 1:
        raise TreeError("vertex count must be positive", lineno)
    parent: list[Optional[int]] = [None] * n
    weight: list[Optional[Fraction]] = [None] * n
    for lineno, parts in rows[1:]:
        if len(parts) != 4 or parts[0] != "node":
            raise TreeError("expected 'node <id> <parent_id|-> <weight>'", lineno)
        try:
            v = int(parts[1])
            p = None if parts[2] == "-" else int(parts[2])
            w = parse_rational(parts[3])
        except ValueError as exc:
            raise TreeError(str(exc), lineno) from None
        if not 0 <= v < n:
            raise TreeError(f"vertex id {v} out of range", lineno)
        if weight[v] is not None:
            raise TreeError(f"duplicate vertex id {v}", lineno)
        if w < 0:
            raise TreeError(f"negative weight {parts[3]}", lineno)
        if p is not None and not 0 <= p < n:
            raise TreeError(f"parent id {p} out of range", lineno)
        if p == v:
            raise TreeError(f"vertex {v} is its own parent (cycle)", lineno)
        if p is None and v != root:
            raise TreeError(f"vertex {v} has no parent but root is {root} (multiple roots)", lineno)
        if p is not None and v == root:
            raise TreeError(f"root {v} must have parent '-'", lineno)
        parent[v] = p
        weight[v] = w
    missing = [v for v in range(n) if weight[v] is None]
    if missing:
        raise TreeError(f"missing node lines for ids {missing[:5]}")
    return WeightedTree.from_parents(parent, weight)


def serialize_tree(t: WeightedTree) -> str:
    out = [f"tree {t.n} {t.root}"]
    for v in range(t.n):
        p = "-" if t.parent[v] is None else str(t.parent[v])
        out.append(f"node {v} {p} {format_rational(t.weight[v])}")
    return "\n".join(out) + "\n"


def parse_edge_tree(text: str) -> EdgeWeightedTree:
    """Parse the ``etree``/``edge`` line format."""
    rows = list(_lines(text))
    if not rows:
        raise TreeError("empty input")
    lineno, head = rows[0]
    if len(head) != 3 or head[0] != "etree":
        raise TreeError("expected header 'etree <n> <root_id>'", lineno)
    n, root = int(head[1]), int(head[2])
    parent: list[Optional[int]] = [None] * n
    weight: list = [None] * n
    for lineno, parts in rows[1:]:
        if len(parts) != 4 or parts[0] != "edge":
            raise TreeError("expected 'edge <child_id> <parent_id> <weight>'", lineno)
        try:
            v, p, w = int(parts[1]), int(parts[2]), parse_rational(parts[3])
        except ValueError as exc:
            raise TreeError(str(exc), lineno) from None
        if not (0 <= v < n and 0 <= p < n):
            raise TreeError("vertex id out of range", lineno)
        if v == root:
            raise TreeError("the root cannot be an edge child", lineno)
        if parent[v] is not None:
            raise TreeError(f"duplicate edge for child {v}", lineno)
        if v == p:
            raise TreeError(f"self-loop at {v}", lineno)
        if w < 0:
            raise TreeError("negative edge weight", lineno)
        parent[v] = p
        weight[v] = w
    if sum(p is not None for p in parent) != n - 1:
        raise TreeError(f"expected {n - 1} edge lines")
    return EdgeWeightedTree.from_parents(parent, weight)


def serialize_edge_tree(t: EdgeWeightedTree) -> str:
    out = [f"etree {t.n} {t.root}"]
    for v, p, w in t.edges():
        out.append(f"edge {v} {p} {format_rational(w)}")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------- transforms


def normalize(t: WeightedTree) -> WeightedTree:
    """Enforce the star condition, then scale the maximum weight to 1."""
    if t.n == 1:
        return t.with_weights([1])
    w = list(t.weight)
    if not any(w):
        raise ValueError("cannot normalize: all weights are zero")
    adj = t.adjacency
    changed = True
    while changed:
        changed = False
        for v in range(t.n):
            cap = sum(w[u] for u in adj[v])
            if w[v] > cap:
                w[v] = cap
                changed = True
    top = max(w)
    if top == 0:
        raise ValueError("cannot normalize: star condition forces all weights to zero")
    return t.with_weights(x / top for x in w)


def reduce_edge_variant(t: EdgeWeightedTree) -> tuple[WeightedTree, dict[int, int]]:
    """Subdivide every edge; original vertices get weight ``1 + total edge weight``.

    Original vertices keep their ids.  The returned map sends an edge, named
    by its child endpoint, to the id of the vertex subdividing it.
    """
    big = 1 + sum((w for _, _, w in t.edges()), Fraction(0))
    parent: list[Optional[int]] = list(t.parent)
    weight: list[Fraction] = [big] * t.n
    mid: dict[int, int] = {}
    for v, p, w in t.edges():
        m = len(parent)
        mid[v] = m
        parent.append(p)
        weight.append(w)
        parent[v] = m
    return WeightedTree.from_parents(parent, weight), mid


def contract_chains(t: WeightedTree) -> tuple[WeightedTree, dict[int, tuple[int, ...]]]:
    """Contract every long chain (maximal path of >= 2 degree-2 vertices).

    Returns the contracted tree and a map from each new vertex to the ordered
    original vertices it stands for (a single vertex for uncontracted ones).
    Chains are listed along the path, starting at the end nearer the root.
    A chain node takes the minimum weight on its chain.
    """
    deg2 = [t.degree(v) == 2 for v in range(t.n)]
    adj = t.adjacency
    group = [-1] * t.n
    groups: list[list[int]] = []
    for v in t.preorder:
        if group[v] != -1:
            continue
        if deg2[v]:
            comp = _chain_through(v, adj, deg2)
            if len(comp) > 1:
                gid = len(groups)
                groups.append(comp)
                for u in comp:
                    group[u] = gid
                continue
        group[v] = len(groups)
        groups.append([v])
    # dense new ids in order of each group's smallest original id
    order = sorted(range(len(groups)), key=lambda g: min(groups[g]))
    new_of_group = {g: i for i, g in enumerate(order)}
    new_id = [new_of_group[group[v]] for v in range(t.n)]
    m = len(groups)
    parent: list[Optional[int]] = [None] * m
    weight = [Fraction(0)] * m
    for g, comp in enumerate(groups):
        i = new_of_group[g]
        weight[i] = min(t.weight[u] for u in comp)
        top = min(comp, key=lambda u: t.depth[u])
        p = t.parent[top]
        parent[i] = None if p is None else new_id[p]
    chain_map = {new_of_group[g]: tuple(comp) for g, comp in enumerate(groups)}
    return WeightedTree.from_parents(parent, weight), chain_map


def _chain_through(v: int, adj, deg2) -> list[int]:
    """Ordered maximal run of degree-2 vertices containing ``v``."""
    sides = []
    for start in adj[v]:
        run = []
        prev, cur = v, start
        while deg2[cur]:
            run.append(cur)
            nxt = adj[cur][0] if adj[cur][0] != prev else adj[cur][1]
            prev, cur = cur, nxt
        sides.append(run)
    # adj[v] lists the parent first (if any), so sides[0] is the upper side
    return sides[0][::-1] + [v] + sides[1]


def components_without(t: WeightedTree, members, q: int) -> list[frozenset]:
    """Connected components of ``members - {q}``, ordered by smallest neighbor id of ``q``."""
    out = []
    adj = t.adjacency
    for start in adj[q]:
        if start not in members:
            continue
        comp = {start}
        stack = [start]
        while stack:
            u = stack.pop()
            for y in adj[u]:
                if y != q and y in members and y not in comp:
                    comp.add(y)
                    stack.append(y)
        out.append(frozenset(comp))
    return out


def _view_root(t: WeightedTree, members) -> int:
    depth = t.depth
    return min(members, key=lambda v: (depth[v], v))


def remaining_subtree(t: WeightedTree, queried: Iterable[int], target: int) -> SubtreeView:
    """Component of ``t - queried`` that contains ``target``."""
    queried = set(queried)
    if target in queried:
        raise ValueError(f"target {target} has been queried")
    comp = {target}
    stack = [target]
    adj = t.adjacency
    while stack:
        u = stack.pop()
        for y in adj[u]:
            if y not in queried and y not in comp:
                comp.add(y)
                stack.append(y)
    return SubtreeView(t, frozenset(comp), _view_root(t, comp))


def centroid(view: SubtreeView) -> int:
    """Smallest-id vertex whose removal leaves components of size <= |view|//2."""
    t = view.origin
    members = view.members
    m = len(members)
    if m == 1:
        return next(iter(members))
    # order members so that parents precede children inside the view
    order = [view.root]
    adj = t.adjacency
    par = {view.root: None}
    i = 0
    while i < len(order):
        u = order[i]
        i += 1
        for y in adj[u]:
            if y in members and y not in par:
                par[y] = u
                order.append(y)
    size = dict.fromkeys(order, 1)
    heaviest = dict.fromkeys(order, 0)
    for u in reversed(order):
        p = par[u]
        if p is not None:
            size[p] += size[u]
            if size[u] > heaviest[p]:
                heaviest[p] = size[u]
    half = m // 2
    best = None
    for u in order:
        if max(heaviest[u], m - size[u]) <= half and (best is None or u < best):
            best = u
    return best
