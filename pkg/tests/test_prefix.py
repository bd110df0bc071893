from __future__ import annotations

import itertools
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings

from helpers import parent_lists, path, star
from treesearch.exactlog import leq_log2
from treesearch.gen import generate
from treesearch.prefix import (
    Labeling,
    build_R,
    compose,
    extend_labels,
    extended_heavy_parts,
    label_contracted,
    light_down,
    min_label_connected,
    prefix_queries,
    with_prefixes,
)
from treesearch.qptas import default_L, qptas_sequences
from treesearch.strategy import explore, is_subsequence, modified_cost, sequence_chooser, worst_case_cost
from treesearch.tree import WeightedTree, normalize, remaining_subtree


class TestHeavyParts:
    def test_no_heavy(self):
        t = path([1, 1, 1])
        hp = extended_heavy_parts(t, [False] * 3)
        assert hp.parts == () and hp.contracted.n == 3
        assert hp.contracted.parent == t.parent

    def test_heavy_tail_with_light_anchor(self):
        hp = extended_heavy_parts(path([1, 1, 1]), [False, True, True])
        assert hp.parts == ((0, 1, 2),) and hp.anchors == (0,)
        assert hp.contracted.n == 1

    def test_heavy_root(self):
        hp = extended_heavy_parts(path([1, 1, 1]), [True, True, False])
        assert hp.parts == ((0, 1),) and hp.anchors == (None,)
        assert hp.contracted.n == 2

    def test_sets_sharing_an_anchor_merge(self):
        hp = extended_heavy_parts(star(4), [False, True, False, True])
        assert hp.parts == ((0, 1, 3),)
        assert hp.contracted.n == 2

    @settings(max_examples=60)
    @given(parent_lists(max_n=12))
    def test_partition_properties(self, parent):
        rng = random.Random(len(parent) * 31 + sum(p or 0 for p in parent))
        t = WeightedTree.from_parents(parent, [1] * len(parent))
        heavy = [rng.random() < 0.5 for _ in parent]
        hp = extended_heavy_parts(t, heavy)
        seen = set()
        for part, anchor in zip(hp.parts, hp.anchors):
            assert not seen & set(part)
            seen |= set(part)
            hs = [v for v in part if v != anchor]
            assert all(heavy[v] for v in hs)
            if anchor is not None:
                assert not heavy[anchor]
            # heavy vertices of a part have no heavy neighbour outside it
            for v in hs:
                for y in t.neighbors(v):
                    assert not heavy[y] or y in part
        for v in range(t.n):
            if heavy[v]:
                assert v in seen
        # contracting the parts gives the contracted topology
        ids = hp.node_of
        edges = {frozenset((ids[v], ids[t.parent[v]])) for v in range(t.n) if t.parent[v] is not None}
        edges = {e for e in edges if len(e) == 2}
        tc = hp.contracted
        assert edges == {frozenset((v, tc.parent[v])) for v in range(tc.n) if tc.parent[v] is not None}


class TestLabels:
    def test_singleton(self):
        assert label_contracted(path([1])).labels == (1,)

    def test_path3(self):
        assert label_contracted(path([1, 1, 1])).labels == (2, 1, 2)

    def test_path7(self):
        assert label_contracted(path([1] * 7)).labels == (3, 2, 3, 1, 3, 2, 3)

    @settings(max_examples=80)
    @given(parent_lists(max_n=14))
    def test_separation_and_bound(self, parent):
        t = WeightedTree.from_parents(parent, [1] * len(parent))
        lab = label_contracted(t)
        for u, v in itertools.combinations(range(t.n), 2):
            if lab[u] == lab[v]:
                inner = t.path(u, v)[1:-1]
                assert any(lab[z] < lab[u] for z in inner)
        assert max(lab.labels) <= t.n.bit_length()  # floor(log2 m) + 1


class TestR:
    def test_path3(self):
        assert build_R(path([1, 1, 1]), Labeling((2, 1, 2))) == ((1,), (), ())

    def test_minimal_label_has_empty_prefix(self):
        t = path([1] * 7)
        lab = label_contracted(t)
        R = build_R(t, lab)
        assert R[3] == ()
        for v in range(t.n):
            if all(lab[u] >= lab[v] for u in t.subtree(v)):
                assert R[v] == ()

    @settings(max_examples=60)
    @given(parent_lists(max_n=12))
    def test_rule(self, parent):
        t = WeightedTree.from_parents(parent, [1] * len(parent))
        lab = label_contracted(t)
        R = build_R(t, lab)
        for v in range(t.n):
            want = [
                u
                for u in t.subtree(v)
                if lab[u] < lab[v] and all(lab[z] > lab[u] for z in t.path(v, u)[1:-1])
            ]
            assert sorted(R[v]) == sorted(want)
            labels = [lab[u] for u in R[v]]
            assert labels == sorted(set(labels))


class TestCompose:
    def test_empty_prefix(self):
        S = ((1,), (1,))
        assert compose(((), ()), S) == S

    def test_empty_sequences(self):
        R = ((1,), ())
        assert compose(R, ((), ())) == R

    def test_three_path_concatenation(self):
        t = path([1, F(1, 4), F(1, 4)])
        t = normalize(t)
        S, p, cs = qptas_sequences(t, 2, default_L(2, 3))
        Splus, R, lab, hp = with_prefixes(t, S, p.threshold)
        for v in range(t.n):
            assert Splus[v] == R[v] + S[v]


def dp_instances(count, c=2, weights="uniform"):
    for seed in range(count):
        n = random.Random(seed).randint(2, 7)
        yield seed, normalize(generate("random", n, weights, seed)), c


@pytest.mark.parametrize("seed, t, c", list(dp_instances(14)))
def test_prefix_bounds_on_dp_output(seed, t, c):
    S, p, cs = qptas_sequences(t, c, default_L(c, t.n))
    Splus, R, lab, hp = with_prefixes(t, S, p.threshold)
    heavy = cs.rounded.heavy
    for seq in R:
        assert not any(heavy[u] for u in seq)
    plus = explore(t, sequence_chooser(t, Splus))
    base = explore(t, sequence_chooser(t, S))
    for x, tr in plus.items():
        assert leq_log2(F(prefix_queries(tr, R), 2), t.n)
        assert leq_log2(F(light_down(t, tr, p.threshold), 2), t.n)
        s_part = [st.vertex for st in tr.steps if st.index >= len(R[st.owner])]
        assert is_subsequence(s_part, base[x].queries)
        done = set()
        for st in tr.steps:
            view = remaining_subtree(t, done, x)
            assert min_label_connected(t, lab, view.members)
            done.add(st.vertex)
    slack = worst_case_cost(t, Splus) - modified_cost(t, S, p.omega, c)
    # slack <= 4(2c+1) omega log2 n
    assert slack <= 0 or leq_log2(slack / (4 * (2 * c + 1) * p.omega), t.n)


def test_extend_labels_copies_part_label():
    t = path([1, 1, 1, 1])
    hp = extended_heavy_parts(t, [False, True, True, False])
    lab = extend_labels(hp, label_contracted(hp.contracted))
    assert lab[0] == lab[1] == lab[2]
