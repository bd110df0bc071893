"""Query sequence assignments, the strategy they induce, and its costs.

A sequence assignment ``s`` is a tuple indexed by vertex; ``s[v]`` is the
ordered list of vertices queried while ``v`` is the root of the remaining
search tree.  The induced strategy (:func:`execute_strategy`) always queries
the first vertex of ``s[root]`` that is still inside the remaining tree, so
it is a function of the remaining tree alone.  That makes it possible to
evaluate all targets at once by walking the decision tree
(:func:`explore`).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence

from .tree import (
    SubtreeView,
    WeightedTree,
    components_without,
    format_rational,
    parse_rational,
)

__all__ = [
    "Sequences",
    "IncompleteAssignment",
    "QueryStep",
    "QueryTrace",
    "ScheduleAssignment",
    "Violation",
    "StabilityCounterexample",
    "sequence_chooser",
    "execute_strategy",
    "explore",
    "worst_case_cost",
    "modified_cost",
    "validate_assignment",
    "validate_schedule",
    "schedule_duration",
    "check_stability",
    "is_subsequence",
    "serialize_sequences",
    "parse_sequences",
    "serialize_schedule",
    "parse_schedule",
    "format_trace",
]

Sequences = tuple  # tuple[tuple[int, ...], ...] indexed by vertex

FOUND, UP, DOWN = "found", "up", "down"


class IncompleteAssignment(RuntimeError):
    """A strategy ran out of queries while the remaining tree still had several vertices."""

    def __init__(self, vertex: int, view: Iterable[int]):
        self.vertex = vertex
        self.view = tuple(sorted(view))
        super().__init__(
            f"incomplete assignment: sequence of vertex {vertex} exhausted "
            f"with remaining view {list(self.view)}"
        )


@dataclass(frozen=True)
class QueryStep:
    vertex: int
    reply: str
    cum: Fraction
    owner: int = -1  # root whose sequence supplied the query
    index: int = -1  # position of the query inside that sequence


@dataclass
class QueryTrace:
    target: int
    steps: list = field(default_factory=list)
    light_down: int = 0

    @property
    def cost(self) -> Fraction:
        return self.steps[-1].cum if self.steps else Fraction(0)

    @property
    def queries(self) -> list[int]:
        return [s.vertex for s in self.steps]


def _light(t: WeightedTree, v: int, omega, c) -> bool:
    return omega is not None and t.weight[v] < c * omega


def _reply(t: WeightedTree, q: int, x: int) -> str:
    if q == x:
        return FOUND
    # down exactly when the target sits below q: the new root is a child of q
    return DOWN if t.is_ancestor(q, x) else UP


def execute_strategy(
    t: WeightedTree,
    s: Sequence[Sequence[int]],
    x: int,
    omega: Optional[Fraction] = None,
    c: Optional[int] = None,
) -> QueryTrace:
    """Run the strategy induced by ``s`` against target ``x``.

    ``light_down`` counts down replies on vertices lighter than ``c*omega``
    when both are given.
    """
    trace = QueryTrace(x)
    view = set(range(t.n))
    v = t.root
    cum = Fraction(0)
    adj = t.adjacency
    while len(view) > 1:
        seq = s[v]
        for i, u in enumerate(seq):
            if u in view:
                break
        else:
            raise IncompleteAssignment(v, view)
        cum += t.weight[u]
        reply = _reply(t, u, x)
        trace.steps.append(QueryStep(u, reply, cum, v, i))
        if reply == FOUND:
            break
        # remaining tree: component of view - {u} holding x
        comp = {x}
        stack = [x]
        while stack:
            a = stack.pop()
            for b in adj[a]:
                if b != u and b in view and b not in comp:
                    comp.add(b)
                    stack.append(b)
        view = comp
        if reply == DOWN:
            if _light(t, u, omega, c):
                trace.light_down += 1
            v = t.step_towards(u, x)
    return trace


def sequence_chooser(t: WeightedTree, s: Sequence[Sequence[int]]) -> Callable:
    """Adapter turning a sequence assignment into a ``chooser(members, root)``."""

    def choose(members, root):
        seq = s[root]
        for i, u in enumerate(seq):
            if u in members:
                return u, root, i
        raise IncompleteAssignment(root, members)

    return choose


def explore(
    t: WeightedTree,
    chooser: Callable,
    omega: Optional[Fraction] = None,
    c: Optional[int] = None,
    members: Optional[frozenset] = None,
    root: Optional[int] = None,
) -> dict[int, QueryTrace]:
    """Traces for every target, obtained by walking the strategy's decision tree.

    ``chooser(members, root)`` returns the vertex to query (optionally as a
    ``(vertex, owner, index)`` triple).  The walk touches each decision-tree
    node once, so the total work is the sum of the remaining-tree sizes.
    """
    if members is None:
        members = frozenset(range(t.n))
        root = t.root
    elif root is None:
        root = min(members, key=lambda v: (t.depth[v], v))
    traces: dict[int, QueryTrace] = {}
    # stack entries: (members, root, steps so far, cumulative cost, light downs)
    stack = [(members, root, (), Fraction(0), 0)]
    while stack:
        mem, r, steps, cum, ld = stack.pop()
        if len(mem) == 1:
            (x,) = mem
            traces[x] = QueryTrace(x, list(steps), ld)
            continue
        pick = chooser(mem, r)
        if isinstance(pick, tuple):
            q, owner, idx = pick
        else:
            q, owner, idx = pick, r, -1
        if q not in mem:
            raise IncompleteAssignment(r, mem)
        cum2 = cum + t.weight[q]
        traces[q] = QueryTrace(q, list(steps) + [QueryStep(q, FOUND, cum2, owner, idx)], ld)
        for comp in components_without(t, mem, q):
            if r in comp:
                stack.append((comp, r, steps + (QueryStep(q, UP, cum2, owner, idx),), cum2, ld))
            else:
                child = t.step_towards(q, next(iter(comp)))
                ld2 = ld + (1 if _light(t, q, omega, c) else 0)
                stack.append((comp, child, steps + (QueryStep(q, DOWN, cum2, owner, idx),), cum2, ld2))
    return traces


def worst_case_cost(t: WeightedTree, s: Sequence[Sequence[int]]) -> Fraction:
    traces = explore(t, sequence_chooser(t, s))
    return max(tr.cost for tr in traces.values())


def modified_cost(
    t: WeightedTree, s: Sequence[Sequence[int]], omega: Fraction, c: int
) -> Fraction:
    """Worst case of ``cost - (2c+1)*omega*light_down`` over all targets."""
    omega = Fraction(omega)
    if omega <= 0 or c < 1:
        raise ValueError("need omega > 0 and c >= 1")
    traces = explore(t, sequence_chooser(t, s), omega, c)
    k = (2 * c + 1) * omega
    return max(tr.cost - k * tr.light_down for tr in traces.values())


def validate_assignment(t: WeightedTree, s: Sequence[Sequence[int]]) -> None:
    if len(s) != t.n:
        raise ValueError(f"assignment has {len(s)} sequences for {t.n} vertices")
    for v, seq in enumerate(s):
        for u in seq:
            if not 0 <= u < t.n:
                raise ValueError(f"sequence of {v} lists unknown vertex {u}")
        if v in seq and seq[-1] != v:
            raise ValueError(f"vertex {v} appears in its own sequence but not last")


# ---------------------------------------------------------------- schedules


ScheduleAssignment = tuple  # per vertex: tuple of (vertex, start) jobs


@dataclass(frozen=True)
class Violation:
    kind: str  # "overlap", "separation", "cover", "conflict"
    vertices: tuple
    message: str

    def __str__(self) -> str:
        return f"{self.kind}: {self.message}"


def schedule_duration(t: WeightedTree, sched: ScheduleAssignment) -> Fraction:
    best = Fraction(0)
    for jobs in sched:
        for u, st in jobs:
            best = max(best, st + t.weight[u])
    return best


def validate_schedule(t: WeightedTree, sched: ScheduleAssignment) -> Optional[Violation]:
    """First violated consistency condition, or ``None`` for a consistent schedule.

    Checks that no two jobs at a vertex overlap, that a child's job is either
    shared with the parent or starts after the parent's own job ends, that a
    vertex has one start time everywhere, and that queried vertices cover
    every edge.
    """
    w = t.weight
    start: dict[int, Fraction] = {}
    for v, jobs in enumerate(sched):
        for u, st in jobs:
            if u in start and start[u] != st:
                return Violation("conflict", (v, u), f"vertex {u} starts at {start[u]} and {st}")
            start[u] = st
    for v, jobs in enumerate(sched):
        ordered = sorted(jobs, key=lambda j: j[1])
        for (u1, s1), (u2, s2) in zip(ordered, ordered[1:]):
            if s1 + w[u1] > s2:
                return Violation(
                    "overlap", (v, u1, u2), f"jobs of {u1} and {u2} overlap in the schedule of {v}"
                )
    own = [next((st for u, st in sched[v] if u == v), None) for v in range(t.n)]
    for v in range(t.n):
        p = t.parent[v]
        if p is None:
            continue
        parent_jobs = set(sched[p])
        for u, st in sched[v]:
            if (u, st) in parent_jobs:
                continue
            if own[p] is None or own[p] + w[p] > st:
                return Violation(
                    "separation",
                    (p, v, u),
                    f"job of {u} at {st} in the schedule of {v} is neither in the schedule "
                    f"of its parent {p} nor after {p}'s own job",
                )
        if own[p] is None and own[v] is None:
            return Violation("cover", (p, v), f"edge ({p}, {v}) has no queried endpoint")
    return None


# ---------------------------------------------------------------- stability


@dataclass
class StabilityCounterexample:
    target: int
    original: list
    perturbed: list
    jumps: list


def is_subsequence(small: Sequence, big: Sequence) -> bool:
    it = iter(big)
    return all(any(a == b for b in it) for a in small)


def _run_with_jumps(t, s, x, rng, p_jump):
    """Algorithm-1 run that may move the root variable down the path to ``x``.

    A jump to ``y`` also tells the strategy that the target is below ``y``,
    so the remaining tree is cut to the subtree of ``y``.
    """
    view = set(range(t.n))
    v = t.root
    queries, jumps = [], []
    adj = t.adjacency
    while len(view) > 1:
        for u in s[v]:
            if u in view:
                break
        else:
            raise IncompleteAssignment(v, view)
        queries.append(u)
        if u == x:
            break
        comp = {x}
        stack = [x]
        while stack:
            a = stack.pop()
            for b in adj[a]:
                if b != u and b in view and b not in comp:
                    comp.add(b)
                    stack.append(b)
        view = comp
        if t.is_ancestor(u, x):
            r = t.step_towards(u, x)
            v = r
            if rng is not None and r != x and rng.random() < p_jump:
                below = t.path(r, x)[1:]
                v = rng.choice(below)
                jumps.append((len(queries), v))
                view = {y for y in view if t.is_ancestor(v, y)}
    return queries, jumps


def check_stability(
    t: WeightedTree,
    s: Sequence[Sequence[int]],
    trials: int,
    seed: int,
    p_jump: float = 0.5,
) -> Optional[StabilityCounterexample]:
    """Randomized search for a root jump that breaks the subsequence property.

    Returns ``None`` when every trial passes.
    """
    rng = random.Random(seed)
    base: dict[int, list] = {}
    for _ in range(trials):
        x = rng.randrange(t.n)
        if x not in base:
            base[x] = _run_with_jumps(t, s, x, None, 0)[0]
        perturbed, jumps = _run_with_jumps(t, s, x, rng, p_jump)
        if not is_subsequence(perturbed, base[x]):
            return StabilityCounterexample(x, base[x], perturbed, jumps)
    return None


# ---------------------------------------------------------------- file formats


def _rows(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def serialize_sequences(s: Sequence[Sequence[int]]) -> str:
    out = [f"strategy {len(s)}"]
    for v, seq in enumerate(s):
        out.append(" ".join(["seq", str(v), *map(str, seq)]))
    return "\n".join(out) + "\n"


def parse_sequences(text: str) -> Sequences:
    rows = list(_rows(text))
    if not rows or rows[0][1][0] != "strategy" or len(rows[0][1]) != 2:
        raise ValueError("expected header 'strategy <n>'")
    n = int(rows[0][1][1])
    seqs: list[Optional[tuple]] = [None] * n
    for lineno, parts in rows[1:]:
        if parts[0] != "seq" or len(parts) < 2:
            raise ValueError(f"line {lineno}: expected 'seq <id> ...'")
        v = int(parts[1])
        if not 0 <= v < n or seqs[v] is not None:
            raise ValueError(f"line {lineno}: bad or duplicate id {v}")
        seqs[v] = tuple(int(u) for u in parts[2:])
    # vertices without a line get an empty sequence; execution reports them
    return tuple(seq if seq is not None else () for seq in seqs)


def serialize_schedule(sched: ScheduleAssignment) -> str:
    out = [f"schedule {len(sched)}"]
    for v, jobs in enumerate(sched):
        for u, st in jobs:
            out.append(f"job {v} {u} {format_rational(st)}")
    return "\n".join(out) + "\n"


def parse_schedule(text: str) -> ScheduleAssignment:
    rows = list(_rows(text))
    if not rows or rows[0][1][0] != "schedule":
        raise ValueError("expected header 'schedule <n>'")
    n = int(rows[0][1][1])
    jobs: list[list] = [[] for _ in range(n)]
    for lineno, parts in rows[1:]:
        if parts[0] != "job" or len(parts) != 4:
            raise ValueError(f"line {lineno}: expected 'job <owner> <vertex> <start>'")
        jobs[int(parts[1])].append((int(parts[2]), parse_rational(parts[3])))
    return tuple(tuple(j) for j in jobs)


def format_trace(trace: QueryTrace) -> str:
    out = [
        f"query {st.vertex} reply={st.reply} cum={format_rational(st.cum)}" for st in trace.steps
    ]
    out.append(
        f"target {trace.target} cost {format_rational(trace.cost)} lightdown {trace.light_down}"
    )
    return "\n".join(out) + "\n"
