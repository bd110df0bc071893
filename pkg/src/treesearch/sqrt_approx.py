"""Recursive search through separating subtrees.

A tree with ``m`` vertices is split into a top part ``T*`` (every vertex
whose subtree has more than ``alpha = m / 2^k`` vertices, plus the root,
with ``k = ceil(sqrt(log2 m))``) and the subtrees hanging below it.  The top
part has long degree-2 chains contracted, the contracted tree is handed
to an inner solver, and its strategy is lifted back to ``T*``.  A target
is located by running the lifted strategy until its nearest top vertex
``x'`` is known, querying ``x'`` if that has not happened yet, and
recursing into the hanging subtree that holds the target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from . import kernels
from .baseline import centroid_chooser
from .exact import opt_oracle, policy_chooser
from .exactlog import ceil_sqrt_log2
from .strategy import DOWN, FOUND, UP, QueryStep, QueryTrace, explore, sequence_chooser
from .tree import SubtreeView, WeightedTree, components_without, contract_chains

__all__ = [
    "PATH_DP_LIMIT",
    "SeparatingTree",
    "LevelRecord",
    "CompositeStrategy",
    "InvalidStrategy",
    "separating_tree",
    "separating_problems",
    "lift_contracted_strategy",
    "LiftedStrategy",
    "make_inner",
    "rec_solve",
    "INNER_SOLVERS",
    "measured_inner_ratio",
]

# exact interval DP on remnant paths up to this many vertices, halving beyond
PATH_DP_LIMIT = 256
INNER_SOLVERS = ("centroid", "oracle", "qptas", "auto")


class InvalidStrategy(RuntimeError):
    pass


# ---------------------------------------------------------------- separating tree


@dataclass(frozen=True)
class SeparatingTree:
    root: int
    alpha: Fraction
    members: frozenset
    components: tuple  # SubtreeViews of the hanging subtrees


def separating_tree(t: WeightedTree, alpha, root: Optional[int] = None) -> SeparatingTree:
    """Vertices of ``T_root`` whose subtree exceeds ``alpha``, plus ``root``.

    The set is closed under taking parents inside ``T_root``, and each
    hanging subtree has at most ``alpha`` vertices.
    """
    alpha = Fraction(alpha)
    if alpha < 1:
        raise ValueError("alpha must be at least 1")
    root = t.root if root is None else root
    size = t.subtree_size
    members = {root}
    comps = []
    stack = [root]
    while stack:
        v = stack.pop()
        for ch in t.children[v]:
            if size[ch] > alpha:
                members.add(ch)
                stack.append(ch)
            else:
                comps.append(SubtreeView(t, frozenset(t.subtree(ch)), ch))
    comps.sort(key=lambda c: c.root)
    return SeparatingTree(root, alpha, frozenset(members), tuple(comps))


def separating_problems(t: WeightedTree, st: SeparatingTree) -> list[str]:
    """Definition and minimality checks; empty when everything holds."""
    out = []
    if st.root not in st.members:
        out.append("root missing")
    for c in st.components:
        if len(c.members) > st.alpha:
            out.append(f"component at {c.root} has {len(c.members)} > {st.alpha} vertices")
    covered = set(st.members)
    for c in st.components:
        covered |= c.members
    if covered != set(t.subtree(st.root)):
        out.append("members and components do not partition the subtree")
    for v in st.members:
        if v == st.root:
            continue
        if t.parent[v] not in st.members:
            out.append(f"{v} is disconnected from the root")
        leaf = not any(ch in st.members for ch in t.children[v])
        if leaf and t.subtree_size[v] <= st.alpha:
            out.append(f"leaf {v} could be dropped")
    return out


# ---------------------------------------------------------------- inner solvers


def make_inner(name: str, c: int = 2, L: Optional[int] = None, oracle_cap: int = 12) -> Callable:
    """``solver(tree) -> chooser(members, root)`` for the named inner method.

    ``auto`` uses the exact oracle up to ``oracle_cap`` vertices and
    centroid halving beyond.  ``qptas`` normalizes the instance, runs the
    schedule DP with prefixes and refuses more than 16 vertices.
    """
    if name == "centroid":
        return centroid_chooser
    if name == "oracle":
        return lambda tree: policy_chooser(opt_oracle(tree))
    if name == "auto":
        return lambda tree: (
            policy_chooser(opt_oracle(tree)) if tree.n <= oracle_cap else centroid_chooser(tree)
        )
    if name == "qptas":

        def solve(tree):
            from .prefix import with_prefixes
            from .qptas import default_L, qptas_sequences
            from .tree import normalize

            if tree.n > 16:
                raise ValueError(f"qptas inner solver refuses {tree.n} > 16 vertices")
            if tree.n == 1:
                return centroid_chooser(tree)
            nt = normalize(tree)
            S, p, _ = qptas_sequences(nt, c, L or default_L(c, tree.n))
            splus = with_prefixes(nt, S, p.threshold)[0]
            return sequence_chooser(nt, splus)

        return solve
    raise ValueError(f"unknown inner solver {name!r}")


# ---------------------------------------------------------------- lifting


class _PathPlan:
    """Optimal (or, for long paths, halving) search on a fixed vertex order."""

    def __init__(self, order, weights):
        self.order = tuple(order)
        self.exact = len(order) <= PATH_DP_LIMIT
        self.arg = None
        if self.exact and len(order) > 1:
            den = math.lcm(*(Fraction(w).denominator for w in weights))
            _, self.arg = kernels.path_dp([int(Fraction(w) * den) for w in weights])

    def pick(self, i: int, j: int) -> int:
        if self.arg is not None:
            return self.arg[i][j]
        return (i + j) // 2


class LiftedStrategy:
    """Strategy on ``T*`` that follows a strategy for its chain contraction.

    A query to a contracted chain becomes a query to the chain's lightest
    vertex.  Once at most one contracted node is left intact, the remaining
    vertices form a path, or a centre with dangling chain pieces; the centre
    is queried and the last path is searched with the interval DP.
    """

    def __init__(self, tstar: WeightedTree, contracted: WeightedTree, chain_map: dict, cchooser):
        self.tstar = tstar
        self.contracted = contracted
        self.chain_map = chain_map
        self.cchooser = cchooser
        self.group = [0] * tstar.n
        for g, vs in chain_map.items():
            for v in vs:
                self.group[v] = g
        self.rep = {
            g: min(vs, key=lambda v: (tstar.weight[v], v)) for g, vs in chain_map.items()
        }
        self.plans: dict = {}
        self.exact_paths = True

    def _intact(self, W) -> set:
        count: dict = {}
        for v in W:
            g = self.group[v]
            count[g] = count.get(g, 0) + 1
        return {g for g, k in count.items() if k == len(self.chain_map[g])}

    def _path_order(self, W) -> Optional[list]:
        adj = self.tstar.adjacency
        deg = {v: sum(1 for y in adj[v] if y in W) for v in W}
        if any(d > 2 for d in deg.values()):
            return None
        if len(W) == 1:
            return [next(iter(W))]
        start = min(v for v, d in deg.items() if d <= 1)
        order = [start]
        prev = None
        while len(order) < len(W):
            cur = order[-1]
            nxt = [y for y in adj[cur] if y in W and y != prev]
            prev = cur
            order.append(nxt[0])
        return order

    def _plan(self, order) -> _PathPlan:
        key = tuple(order)
        plan = self.plans.get(key)
        if plan is None:
            plan = _PathPlan(order, [self.tstar.weight[v] for v in order])
            if not plan.exact:
                self.exact_paths = False
            self.plans[key] = plan
        return plan

    def traces(self) -> dict:
        """Query list for every target of ``T*`` (local ids)."""
        t = self.tstar
        tc = self.contracted
        out: dict = {}
        stack: list = [("set", frozenset(range(t.n)), t.root, ())]
        while stack:
            item = stack.pop()
            if item[0] == "path":
                _, plan, i, j, qs = item
                if i == j:
                    out[plan.order[i]] = qs
                    continue
                k = plan.pick(i, j)
                q = plan.order[k]
                out[q] = qs + (q,)
                if i <= k - 1:
                    stack.append(("path", plan, i, k - 1, qs + (q,)))
                if k + 1 <= j:
                    stack.append(("path", plan, k + 1, j, qs + (q,)))
                continue
            _, W, root, qs = item
            if len(W) == 1:
                (x,) = W
                out[x] = qs
                continue
            intact = self._intact(W)
            if len(intact) >= 2:
                croot = min(intact, key=lambda g: (tc.depth[g], g))
                pick = self.cchooser(frozenset(intact), croot)
                g = pick[0] if isinstance(pick, tuple) else pick
                if g not in intact:
                    raise InvalidStrategy(f"inner strategy picked {g} outside its view")
                q = self.rep[g]
            else:
                order = self._path_order(W)
                if order is not None:
                    stack.append(("path", self._plan(order), 0, len(order) - 1, qs))
                    continue
                if len(intact) != 1:
                    raise InvalidStrategy("remaining top vertices are neither a path nor a spider")
                (g,) = intact
                q = self.chain_map[g][0]
            out[q] = qs + (q,)
            for comp in components_without(t, W, q):
                r2 = root if root in comp else t.step_towards(q, next(iter(comp)))
                stack.append(("set", comp, r2, qs + (q,)))
        return out


def lift_contracted_strategy(tstar: WeightedTree, cchooser, contracted=None, chain_map=None) -> LiftedStrategy:
    if contracted is None:
        contracted, chain_map = contract_chains(tstar)
    return LiftedStrategy(tstar, contracted, chain_map, cchooser)


# ---------------------------------------------------------------- recursion


@dataclass
class LevelRecord:
    depth: int
    root: int
    size: int
    base: bool
    alpha: Optional[Fraction] = None
    top_size: int = 0
    contracted_size: int = 0
    top_tree: Optional[WeightedTree] = None  # T* (or the whole base instance), local ids
    top_cost: Fraction = Fraction(0)  # worst cost of the lifted (or base) strategy
    max_top_weight: Fraction = Fraction(0)
    component_cost: Fraction = Fraction(0)
    worst: Fraction = Fraction(0)
    decomposition_ok: bool = True
    exact_paths: bool = True


@dataclass
class CompositeStrategy:
    tree: WeightedTree
    queries: dict  # target -> tuple of queried vertices
    levels: list = field(default_factory=list)

    @property
    def depth(self) -> int:
        return max((r.depth for r in self.levels), default=0)

    def trace(self, x: int) -> QueryTrace:
        t = self.tree
        tr = QueryTrace(x)
        cum = Fraction(0)
        for q in self.queries[x]:
            cum += t.weight[q]
            if q == x:
                reply = FOUND
            elif t.is_ancestor(q, x):
                reply = DOWN
            else:
                reply = UP
            tr.steps.append(QueryStep(q, reply, cum))
        return tr

    def cost(self, x: int) -> Fraction:
        w = self.tree.weight
        return sum((w[q] for q in self.queries[x]), Fraction(0))

    def worst_case_cost(self) -> Fraction:
        return max(self.cost(x) for x in range(self.tree.n))

    def validate(self) -> None:
        """Every target is pinned down and each query lies in the remaining tree."""
        t = self.tree
        parent = t.parent
        depth = t.depth
        for x in range(t.n):
            qs = self.queries.get(x)
            if qs is None:
                raise InvalidStrategy(f"no query list for target {x}")
            done: set = set()
            for i, q in enumerate(qs):
                if q in done:
                    raise InvalidStrategy(f"target {x}: {q} queried twice")
                # q is still available iff no earlier query sits on the x-q path
                a, b = x, q
                while True:
                    if a in done or b in done:
                        raise InvalidStrategy(f"target {x}: query {q} is outside the view")
                    if a == b:
                        break
                    if depth[a] >= depth[b]:
                        a = parent[a]
                    else:
                        b = parent[b]
                if q == x and i != len(qs) - 1:
                    raise InvalidStrategy(f"target {x}: queries continue after it was found")
                done.add(q)
            if x not in done and any(y not in done for y in t.adjacency[x]):
                raise InvalidStrategy(f"target {x} is not pinned down by {list(qs)}")


def _explore_local(tree: WeightedTree, chooser) -> dict:
    return {x: tuple(tr.queries) for x, tr in explore(tree, chooser).items()}


def rec_solve(t: WeightedTree, inner="centroid", **inner_kw) -> CompositeStrategy:
    """Build the recursive strategy for ``t``; ``inner`` is a name or a solver."""
    solver = make_inner(inner, **inner_kw) if isinstance(inner, str) else inner
    levels: list = []
    w = t.weight

    def cost(qs):
        return sum((w[q] for q in qs), Fraction(0))

    def solve(r: int, depth: int) -> tuple:
        members = t.subtree(r)
        m = len(members)
        k = ceil_sqrt_log2(m)
        if m <= (1 << k):
            sub, old = t.induced(members)
            local = _explore_local(sub, solver(sub)) if sub.n > 1 else {0: ()}
            qmap = {old[x]: tuple(old[q] for q in qs) for x, qs in local.items()}
            worst = max(cost(qs) for qs in qmap.values())
            levels.append(
                LevelRecord(depth, r, m, True, top_size=m, contracted_size=m, top_tree=sub,
                            top_cost=worst, worst=worst)
            )
            return qmap, worst
        alpha = Fraction(m, 1 << k)
        st = separating_tree(t, alpha, r)
        tstar, old = t.induced(st.members)
        contracted, chain_map = contract_chains(tstar)
        lifted = LiftedStrategy(tstar, contracted, chain_map, solver(contracted))
        top = {old[x]: tuple(old[q] for q in qs) for x, qs in lifted.traces().items()}
        top_cost = max(cost(qs) for qs in top.values())
        max_w = max(w[v] for v in st.members)
        below: dict = {}
        comp_worst = Fraction(0)
        for comp in st.components:
            sub_q, sub_worst = solve(comp.root, depth + 1)
            below[comp.root] = sub_q
            comp_worst = max(comp_worst, sub_worst)
        has_comp = {t.parent[c.root] for c in st.components}
        qmap: dict = {}
        for xp in st.members:
            qs = top[xp]
            if xp in has_comp and xp not in qs:
                qs = qs + (xp,)
            qmap[xp] = qs
        for croot, sub_q in below.items():
            xp = t.parent[croot]
            head = qmap[xp]
            for y, qs in sub_q.items():
                qmap[y] = head + qs
        bound = top_cost + max_w + comp_worst
        worst = Fraction(0)
        ok = True
        for x in members:
            cx = cost(qmap[x])
            worst = max(worst, cx)
            if cx > bound:
                ok = False
        levels.append(
            LevelRecord(depth, r, m, False, alpha, len(st.members), contracted.n, tstar,
                        top_cost, max_w, comp_worst, worst, ok, lifted.exact_paths)
        )
        return qmap, worst

    qmap, _ = solve(t.root, 1)
    levels.sort(key=lambda rec: (rec.depth, rec.root))
    return CompositeStrategy(t, qmap, levels)


def measured_inner_ratio(cs: CompositeStrategy, cap: int = 14) -> Optional[Fraction]:
    """Worst ratio, over recursion levels, of the top strategy's cost to the top tree's optimum.

    Levels whose top tree exceeds ``cap`` vertices or has optimum 0 are skipped.
    """
    best = None
    for rec in cs.levels:
        tree = rec.top_tree
        if tree is None or tree.n > cap or tree.n == 1:
            continue
        opt = opt_oracle(tree, cap).value
        if opt == 0:
            continue
        r = rec.top_cost / opt
        best = r if best is None else max(best, r)
    return best
