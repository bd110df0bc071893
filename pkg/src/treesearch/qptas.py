"""Schedule dynamic program over boxes and slots, and the sequences it yields.

Time is measured in integer slots of length ``1/(cn)``.  A box is ``a``
slots long, so ``omega = a/(cn)`` and the horizon is ``L`` boxes.  Vertices
heavier than ``c*omega`` have their weight rounded up to whole boxes and
start on box boundaries; lighter ones are rounded up to whole slots.

For every vertex the DP keeps the set of reachable summaries of its own
schedule (per-box loads plus the vertex's start time).  A parent combines
its children's summaries, then tries to insert its own query.  The smallest
feasible ``omega`` is found by a linear sweep, a witness is recovered by
backtracking, and the query sequences are read off the witness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from . import kernels
from .kernels import OVF, StateCapExceeded
from .strategy import ScheduleAssignment
from .tree import WeightedTree

__all__ = [
    "DEFAULT_STATE_CAP",
    "MAX_SLOTS_PER_BOX",
    "OVF",
    "RoundingParams",
    "RoundedTree",
    "DpState",
    "DpTables",
    "ChosenSchedule",
    "SweepExhausted",
    "StateCapExceeded",
    "WitnessError",
    "round_weights",
    "merge_schedules",
    "insert_vertex",
    "build_strategy",
    "omega_sweep",
    "validate_witness",
    "extract_sequences",
    "EXCLUSION_RULES",
    "schedule_from_witness",
    "qptas_sequences",
    "params_for_epsilon",
    "default_L",
    "backtrack",
    "root_states",
    "sweep_limit",
]

DEFAULT_STATE_CAP = 400_000
# loads live in one byte per box and 255 marks overflow
MAX_SLOTS_PER_BOX = 254


class SweepExhausted(RuntimeError):
    pass


class WitnessError(RuntimeError):
    pass


@dataclass(frozen=True)
class RoundingParams:
    c: int
    n: int
    a: int
    L: int

    def __post_init__(self):
        if self.c < 1 or self.n < 1 or self.a < 1 or self.L < 1:
            raise ValueError("c, n, a and L must be positive integers")
        if self.a > MAX_SLOTS_PER_BOX:
            raise ValueError(f"a = {self.a} exceeds the {MAX_SLOTS_PER_BOX}-slot box limit")

    @property
    def slot(self) -> Fraction:
        return Fraction(1, self.c * self.n)

    @property
    def omega(self) -> Fraction:
        return Fraction(self.a, self.c * self.n)

    @property
    def threshold(self) -> Fraction:
        return self.c * self.omega

    @property
    def horizon(self) -> int:
        return self.L * self.a

    def to_time(self, slots: int) -> Fraction:
        return Fraction(slots, self.c * self.n)


@dataclass(frozen=True)
class RoundedTree:
    base: WeightedTree
    params: RoundingParams
    wprime: tuple  # rounded weights as rationals
    slots: tuple  # rounded weights in slots
    heavy: tuple


def round_weights(t: WeightedTree, p: RoundingParams) -> RoundedTree:
    cn = p.c * p.n
    heavy = tuple(w > p.threshold for w in t.weight)
    slots = []
    for w, h in zip(t.weight, heavy):
        k = math.ceil(w * cn)
        if h:
            k = -(-k // p.a) * p.a
        slots.append(k)
    return RoundedTree(t, p, tuple(p.to_time(k) for k in slots), tuple(slots), heavy)


@dataclass(frozen=True)
class DpState:
    """One schedule summary.  Loads are slot counts per box, ``OVF`` when overfull."""

    loads: tuple
    max_child_load: tuple
    tv: Optional[int] = None  # start slot of the vertex's own query, None = not queried
    must_contain: bool = False
    provenance: tuple = field(default=(), compare=False)

    @classmethod
    def empty(cls, L: int) -> "DpState":
        return cls((0,) * L, (0,) * L)


def merge_schedules(s_orig: DpState, s_add: DpState, p: RoundingParams) -> DpState:
    """Add a child's schedule summary into the running combination."""
    key = (bytes(s_orig.loads), bytes(s_orig.max_child_load), s_orig.must_contain)
    child = (bytes(s_add.loads), -1 if s_add.tv is None else s_add.tv)
    ((loads, mcl, must),) = kernels.merge_level([key], [child], p.a, 1)
    return DpState(tuple(loads), tuple(mcl), None, must, (s_orig, s_add))


def insert_vertex(
    s: DpState, v: int, p: RoundingParams, rt: RoundedTree, t: Optional[int]
) -> list:
    """The vertex's own summary after placing its query at slot ``t`` (or not at all).

    Returns an empty list when the placement is infeasible.
    """
    if t is None and s.must_contain:
        return []
    if t is not None and rt.heavy[v] and t % p.a:
        raise ValueError(f"heavy vertex {v} must start on a box boundary, got slot {t}")
    r = kernels.insert_one(
        bytes(s.loads), bytes(s.max_child_load), -1 if t is None else t, rt.slots[v], p.a, p.L
    )
    if r is None:
        return []
    return [DpState(tuple(r), (0,) * p.L, t, False, (s, t))]


# ---------------------------------------------------------------- the DP


@dataclass
class DpTables:
    """Per-vertex state sets with provenance links.

    ``final[v]`` maps ``(loads, t)`` to ``(merged_key, t)``; ``levels[v][i]``
    maps a merged key after the ``i``-th child to ``(previous_key, child_key)``.
    With ``keep_levels=False`` the merge levels are recomputed on demand.
    """

    rounded: RoundedTree
    final: dict
    levels: dict
    cap: int
    prune: bool = False

    @property
    def params(self) -> RoundingParams:
        return self.rounded.params

    def merge_levels(self, v: int) -> list:
        if v in self.levels:
            return self.levels[v]
        return _merge_levels(self.rounded, v, self.final, self.cap)


def _zero_key(L: int):
    z = bytes(L)
    return (z, z, False)


def _merge_levels(rt: RoundedTree, v: int, final: dict, cap: int) -> list:
    p = rt.params
    cur = {_zero_key(p.L): None}
    out = []
    for ch in rt.base.children[v]:
        cur = kernels.merge_level(cur, final[ch], p.a, cap)
        out.append(cur)
    return out


def _prune_dominated(states: dict) -> dict:
    """Drop states whose loads are pointwise >= another state's with the same start."""
    by_t: dict = {}
    for key in states:
        by_t.setdefault(key[1], []).append(key)
    keep = {}
    for t, keys in by_t.items():
        keys.sort(key=lambda k: sum(k[0]))
        kept: list = []
        for k in keys:
            if not any(all(x <= y for x, y in zip(o[0], k[0])) for o in kept):
                kept.append(k)
        for k in kept:
            keep[k] = states[k]
    return {k: states[k] for k in states if k in keep}


def build_strategy(
    rt: RoundedTree,
    cap: int = DEFAULT_STATE_CAP,
    keep_levels: bool = True,
    prune: bool = False,
) -> DpTables:
    """Run the DP bottom-up over the whole tree.

    ``tables.final[root]`` is empty exactly when no schedule fits the horizon.
    Raises :class:`StateCapExceeded` when a state set outgrows ``cap``.
    """
    t = rt.base
    p = rt.params
    final: dict = {}
    levels: dict = {}
    for v in reversed(t.preorder):
        lv = _merge_levels(rt, v, final, cap)
        merged = lv[-1] if lv else {_zero_key(p.L): None}
        out = kernels.insert_level(merged, rt.slots[v], rt.heavy[v], p.a, p.L, cap)
        if prune:
            out = _prune_dominated(out)
        final[v] = out
        if keep_levels:
            levels[v] = lv
    return DpTables(rt, final, levels, cap, prune)


def root_states(tables: DpTables) -> list:
    """Root states as :class:`DpState` values, in discovery order."""
    root = tables.rounded.base.root
    return [
        DpState(tuple(k[0]), (0,) * tables.params.L, None if k[1] < 0 else k[1])
        for k in tables.final[root]
    ]


# ---------------------------------------------------------------- witness


@dataclass(frozen=True)
class ChosenSchedule:
    rounded: RoundedTree
    tv: tuple  # start slot per vertex, None when the vertex is never queried
    loads: tuple  # per-vertex box loads in slots

    @property
    def params(self) -> RoundingParams:
        return self.rounded.params

    def start(self, v: int) -> Optional[Fraction]:
        s = self.tv[v]
        return None if s is None else self.params.to_time(s)


def _last_busy_box(loads: bytes) -> int:
    for i in range(len(loads) - 1, -1, -1):
        if loads[i]:
            return i
    return -1


def _pick_root_state(final_root: dict):
    best = None
    for order, key in enumerate(final_root):
        rank = (_last_busy_box(key[0]), 0 if key[1] < 0 else 1, order)
        if best is None or rank < best[0]:
            best = (rank, key)
    return best[1]


def backtrack(tables: DpTables, root_key=None) -> ChosenSchedule:
    rt = tables.rounded
    t = rt.base
    if root_key is None:
        root_key = _pick_root_state(tables.final[t.root])
    tv: list = [None] * t.n
    loads: list = [None] * t.n
    stack = [(t.root, root_key)]
    while stack:
        v, key = stack.pop()
        mkey, start = tables.final[v][key]
        tv[v] = None if start < 0 else start
        loads[v] = tuple(key[0])
        lv = tables.merge_levels(v)
        kids = t.children[v]
        for i in range(len(kids) - 1, -1, -1):
            prev, ckey = lv[i][mkey]
            stack.append((kids[i], ckey))
            mkey = prev
    return ChosenSchedule(rt, tuple(tv), tuple(loads))


def validate_witness(cs: ChosenSchedule) -> list[str]:
    """Re-check the witness in exact rationals; returns the violated conditions."""
    rt = cs.rounded
    p = cs.params
    t = rt.base
    box = p.omega
    out = []
    horizon = p.L * box
    for v in range(t.n):
        kids = t.children[v]
        sv = cs.start(v)
        if sv is None:
            missing = [ch for ch in kids if cs.tv[ch] is None]
            if missing:
                out.append(f"vertex {v} and its children {missing} are all unqueried")
            expect = [sum((p.to_time(cs.loads[ch][b]) for ch in kids), Fraction(0)) for b in range(p.L)]
        else:
            if sv % p.slot or (rt.heavy[v] and sv % box):
                out.append(f"vertex {v} starts off grid at {sv}")
            end = sv + rt.wprime[v]
            if end > horizon:
                out.append(f"vertex {v} ends at {end}, past the horizon {horizon}")
            expect = []
            for b in range(p.L):
                lo, hi = b * box, (b + 1) * box
                ap = max(Fraction(0), min(end, hi) - max(sv, lo))
                for ch in kids:
                    if p.to_time(cs.loads[ch][b]) + ap > box:
                        out.append(f"child {ch} of {v} and the job of {v} overfill box {b}")
                if end >= hi:
                    below = sum((p.to_time(cs.loads[ch][b]) for ch in kids), Fraction(0))
                    expect.append(below + ap)
                else:
                    expect.append(ap)
        got = [p.to_time(x) for x in cs.loads[v]]
        if got != expect:
            out.append(f"loads of {v} do not follow from its children")
        for b, x in enumerate(expect):
            if x > box:
                out.append(f"box {b} of vertex {v} holds {x} > {box}")
    return out


# ---------------------------------------------------------------- extraction


EXCLUSION_RULES = ("next-box", "floor-plus-box")


def extract_sequences(cs: ChosenSchedule, rule: str = "next-box") -> tuple:
    """Query sequences read off a witness.

    ``u`` below ``v`` enters the sequence of ``v`` unless some other queried
    vertex on the path from ``v`` to ``u`` starts before a cutoff.  With
    ``rule="next-box"`` the cutoff is the start of the first box after the
    last box ``u`` occupies.  ``"floor-plus-box"`` uses
    ``floor(end) + omega`` instead, which is one box later whenever ``u``
    ends exactly on a box boundary.  Entries are ordered by (first box, end
    box, id) and anything after ``v`` itself is dropped.
    """
    if rule not in EXCLUSION_RULES:
        raise ValueError(f"unknown exclusion rule {rule!r}")
    literal = rule == "floor-plus-box"
    rt = cs.rounded
    t = rt.base
    a = cs.params.a
    tv = cs.tv
    seqs = []
    for v in range(t.n):
        entries = []
        # walk T_v carrying the earliest start of a queried vertex on the path so far
        stack = [(v, None)]
        while stack:
            u, earliest = stack.pop()
            su = tv[u]
            if su is not None:
                end = su + rt.slots[u]
                bound = (end // a) * a + a if literal else -(-end // a) * a
                if earliest is None or earliest >= bound:
                    entries.append(((su // a) * a, -(-end // a) * a, u))
                earliest = su if earliest is None else min(earliest, su)
            for ch in t.children[u]:
                stack.append((ch, earliest))
        entries.sort()
        seq = [u for _, _, u in entries]
        if v in seq:
            seq = seq[: seq.index(v) + 1]
        seqs.append(tuple(seq))
    return tuple(seqs)


def schedule_from_witness(t: WeightedTree, seqs) -> ScheduleAssignment:
    """Earliest start times consistent with the sequence order and parent separation.

    Jobs use the original weights.  Raises ``WitnessError`` if the
    precedences are cyclic.
    """
    w = t.weight
    succ: dict[int, dict[int, Fraction]] = {}
    nodes = set()

    def edge(x, y, d):
        nodes.update((x, y))
        row = succ.setdefault(x, {})
        if y not in row or row[y] < d:
            row[y] = d

    for v, seq in enumerate(seqs):
        nodes.update(seq)
        for z, u in zip(seq, seq[1:]):
            edge(z, u, w[z])
        mine = set(seq)
        if v in mine:
            for ch in t.children[v]:
                for u in seqs[ch]:
                    if u not in mine:
                        edge(v, u, w[v])
    indeg = dict.fromkeys(nodes, 0)
    for x, row in succ.items():
        for y in row:
            indeg[y] += 1
    ready = sorted(x for x in nodes if indeg[x] == 0)
    start = dict.fromkeys(nodes, Fraction(0))
    done = 0
    while ready:
        x = ready.pop()
        done += 1
        for y, d in succ.get(x, {}).items():
            start[y] = max(start[y], start[x] + d)
            indeg[y] -= 1
            if indeg[y] == 0:
                ready.append(y)
    if done != len(nodes):
        raise WitnessError("sequence precedences are cyclic")
    return tuple(tuple((u, start[u]) for u in seq) for seq in seqs)


# ---------------------------------------------------------------- sweep


def sweep_limit(c: int, n: int) -> int:
    if n <= 1:
        return 1
    return 2 * c * n * (n - 1).bit_length()


def omega_sweep(
    t: WeightedTree,
    c: int,
    L: int,
    cap: int = DEFAULT_STATE_CAP,
    keep_levels: bool = True,
    prune: bool = False,
    a_start: int = 1,
) -> tuple:
    """Smallest ``a`` (so ``omega = a/(cn)``) for which a schedule fits; returns its witness.

    Returns ``(params, chosen_schedule)``.  Raises :class:`WitnessError` if
    the backtracked witness fails re-validation.
    """
    limit = sweep_limit(c, t.n)
    for a in range(a_start, limit + 1):
        if a > MAX_SLOTS_PER_BOX:
            break
        p = RoundingParams(c, t.n, a, L)
        rt = round_weights(t, p)
        tables = build_strategy(rt, cap, keep_levels, prune)
        if tables.final[t.root]:
            cs = backtrack(tables)
            bad = validate_witness(cs)
            if bad:
                raise WitnessError("; ".join(bad))
            return p, cs
    raise SweepExhausted(
        f"no feasible omega up to {min(limit, MAX_SLOTS_PER_BOX)}/({c}*{t.n}) with L = {L}"
    )


def qptas_sequences(t: WeightedTree, c: int, L: int, rule: str = "next-box", **kw) -> tuple:
    """Sweep, then extract.  Returns ``(sequences, params, chosen_schedule)``."""
    p, cs = omega_sweep(t, c, L, **kw)
    return extract_sequences(cs, rule), p, cs


def params_for_epsilon(eps, n: int) -> tuple[int, int]:
    """``(c, L)`` wired for a target ratio ``1 + eps``: ``c = ceil(168/eps)``, ``L = ceil(c^2 log2 n)``."""
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    c = math.ceil(168 / eps)
    return c, default_L(c, n)


def default_L(c: int, n: int) -> int:
    """``ceil(c^2 log2 n)``, at least 1, computed exactly."""
    if n <= 1:
        return 1
    lo = c * c * (n.bit_length() - 1)
    # smallest L with 2^L >= n^(c^2)
    target = n ** (c * c)
    L = lo
    while (1 << L) < target:
        L += 1
    return max(1, L)
