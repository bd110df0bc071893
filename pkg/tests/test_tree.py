from __future__ import annotations

import itertools
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import parent_lists, path, star, weighted_trees
from oracles import adjacency, components
from treesearch.tree import (
    EdgeWeightedTree,
    TreeError,
    WeightedTree,
    centroid,
    contract_chains,
    normalize,
    parse_edge_tree,
    parse_tree,
    reduce_edge_variant,
    remaining_subtree,
    serialize_edge_tree,
    serialize_tree,
)


class TestParse:
    def test_singleton(self):
        t = parse_tree("tree 1 0\nnode 0 - 1\n")
        assert t.n == 1 and t.root == 0 and t.weight == (F(1),)

    def test_two_path(self):
        t = parse_tree("tree 2 0\nnode 0 - 1\nnode 1 0 1/2\n")
        assert t.parent == (None, 0)
        assert t.weight == (F(1), F(1, 2))

    def test_decimal_is_exact(self):
        t = parse_tree("tree 2 0\nnode 0 - 0.31\nnode 1 0 1\n")
        assert t.weight[0] == F(31, 100)

    def test_comments_and_blank_lines(self):
        t = parse_tree("# header\ntree 2 1\n\nnode 1 - 2  # root\nnode 0 1 3\n")
        assert t.root == 1 and t.parent == (1, None)

    @pytest.mark.parametrize(
        "text, line",
        [
            ("tree 2 0\nnode 0 - 1\nnode 1 1 1\n", 3),
            ("tree 2 0\nnode 0 - 1\nnode 0 - 1\n", 3),
            ("tree 2 0\nnode 0 - 1\nnode 1 - 1\n", 3),
            ("tree 2 0\nnode 0 - 1\nnode 1 0 -1\n", 3),
            ("tree 2 0\nnode 0 - 1\nnod 1 0 1\n", 3),
            ("tree 2 0\nnode 0 - 1\nnode 1 0 x\n", 3),
        ],
    )
    def test_errors_carry_line_numbers(self, text, line):
        with pytest.raises(TreeError) as err:
            parse_tree(text)
        assert err.value.line == line
        assert f"line {line}" in str(err.value)

    def test_cycle_without_self_parent(self):
        with pytest.raises(TreeError):
            parse_tree("tree 3 0\nnode 0 - 1\nnode 1 2 1\nnode 2 1 1\n")

    def test_missing_nodes(self):
        with pytest.raises(TreeError):
            parse_tree("tree 3 0\nnode 0 - 1\nnode 1 0 1\n")


class TestSerialize:
    def test_singleton_canonical(self):
        assert serialize_tree(path([1])) == "tree 1 0\nnode 0 - 1\n"

    def test_fraction_not_decimal(self):
        text = serialize_tree(path([1, F(3, 8)]))
        assert "3/8" in text and "0.375" not in text

    @given(weighted_trees(zero=True))
    def test_roundtrip(self, t):
        text = serialize_tree(t)
        assert parse_tree(text) == t
        assert serialize_tree(parse_tree(text)) == text

    def test_edge_roundtrip(self):
        e = EdgeWeightedTree.from_parents([None, 0, 1], [None, 1, F(1, 2)])
        text = serialize_edge_tree(e)
        assert text.splitlines()[0] == "etree 3 0"
        assert parse_edge_tree(text) == e
        assert serialize_edge_tree(parse_edge_tree(text)) == text


class TestNormalize:
    def test_scale_only(self):
        assert normalize(path([2, 6, 4])).weight == (F(1, 3), F(1), F(2, 3))

    def test_star_condition_caps(self):
        assert normalize(path([1, F(1, 10)])).weight == (F(1), F(1))

    def test_singleton(self):
        assert normalize(path([7])).weight == (F(1),)

    def test_all_zero_refused(self):
        with pytest.raises(ValueError):
            normalize(path([0, 0]))

    def test_star_fixpoint_forcing_zero_refused(self):
        with pytest.raises(ValueError):
            normalize(path([1, 0]))

    @given(weighted_trees(min_n=2))
    def test_star_condition_and_max(self, t):
        u = normalize(t)
        adj = adjacency(list(u.parent))
        assert max(u.weight) == 1
        for v in range(u.n):
            assert u.weight[v] <= sum(u.weight[y] for y in adj[v])

    @given(weighted_trees())
    def test_idempotent(self, t):
        assert normalize(normalize(t)) == normalize(t)


class TestEdgeReduction:
    def test_single_edge(self):
        t, mids = reduce_edge_variant(EdgeWeightedTree.from_parents([None, 0], [None, 2]))
        order = [0, mids[1], 1]
        assert [t.weight[v] for v in order] == [3, 2, 3]
        assert t.path(0, 1) == order

    def test_singleton(self):
        t, mids = reduce_edge_variant(EdgeWeightedTree.from_parents([None], [None]))
        assert t.n == 1 and t.weight == (F(1),) and mids == {}

    def test_two_edges(self):
        t, mids = reduce_edge_variant(EdgeWeightedTree.from_parents([None, 0, 1], [None, 1, 1]))
        assert [t.weight[v] for v in t.path(0, 2)] == [3, 1, 3, 1, 3]


class TestContractChains:
    def test_five_path(self):
        tc, cmap = contract_chains(path([1] * 5))
        assert tc.n == 3 and tc.parent == (None, 0, 1)
        assert cmap[1] == (1, 2, 3)

    def test_star_unchanged(self):
        t = star(5)
        tc, cmap = contract_chains(t)
        assert tc == t and all(len(v) == 1 for v in cmap.values())

    def test_min_weight(self):
        tc, cmap = contract_chains(path([9, 5, 2, 7, 9]))
        assert tc.weight[1] == 2

    @given(weighted_trees(max_n=12))
    def test_no_long_chain_and_expansion(self, t):
        tc, cmap = contract_chains(t)
        deg = [tc.degree(v) for v in range(tc.n)]
        for v in range(tc.n):
            p = tc.parent[v]
            if p is not None:
                assert not (deg[v] == 2 and deg[p] == 2 and len(cmap[v]) + len(cmap[p]) > 2)
        # every original vertex appears once, chains are paths of t
        flat = sorted(itertools.chain.from_iterable(cmap.values()))
        assert flat == list(range(t.n))
        adj = adjacency(list(t.parent))
        for v, chain in cmap.items():
            for a, b in zip(chain, chain[1:]):
                assert b in adj[a]
            if len(chain) > 1:
                assert all(t.degree(u) == 2 for u in chain)
            assert tc.weight[v] == min(t.weight[u] for u in chain)
        # contracted edges are exactly the original edges between groups
        owner = {u: v for v, chain in cmap.items() for u in chain}
        edges = {
            frozenset((owner[u], owner[t.parent[u]]))
            for u in range(t.n)
            if t.parent[u] is not None and owner[u] != owner[t.parent[u]]
        }
        assert edges == {frozenset((v, tc.parent[v])) for v in range(tc.n) if tc.parent[v] is not None}


class TestRemainingSubtree:
    def test_empty_query_set(self):
        t = path([1, 1, 1])
        view = remaining_subtree(t, set(), 2)
        assert view.members == frozenset({0, 1, 2}) and view.root == 0

    def test_down(self):
        view = remaining_subtree(path([1, 1, 1]), {1}, 2)
        assert view.members == frozenset({2}) and view.root == 2

    def test_up(self):
        view = remaining_subtree(path([1, 1, 1]), {2}, 0)
        assert view.members == frozenset({0, 1}) and view.root == 0

    def test_target_queried(self):
        with pytest.raises(ValueError):
            remaining_subtree(path([1, 1]), {1}, 1)

    @given(parent_lists(min_n=2, max_n=10), st.data())
    def test_monotone(self, parent, data):
        t = WeightedTree.from_parents(parent, [1] * len(parent))
        x = data.draw(st.integers(0, t.n - 1))
        others = [v for v in range(t.n) if v != x]
        u = set(data.draw(st.lists(st.sampled_from(others), max_size=4)))
        v = data.draw(st.sampled_from(others))
        small = remaining_subtree(t, u | {v}, x)
        big = remaining_subtree(t, u, x)
        assert small.members <= big.members
        assert x in small.members
        assert all(t.parent[y] not in small.members for y in [small.root])


class TestCentroid:
    def test_singleton(self):
        assert centroid(path([1]).view()) == 0

    def test_three_path(self):
        assert centroid(path([1, 1, 1]).view()) == 1

    def test_four_path_smallest_id(self):
        assert centroid(path([1, 1, 1, 1]).view()) == 1

    @settings(max_examples=200)
    @given(parent_lists(max_n=14))
    def test_halving_exhaustive(self, parent):
        t = WeightedTree.from_parents(parent, [1] * len(parent))
        adj = adjacency(parent)
        members = frozenset(range(t.n))
        good = [
            v for v in sorted(members) if all(len(c) <= t.n // 2 for c in components(adj, members, v))
        ]
        assert centroid(t.view()) == good[0]
