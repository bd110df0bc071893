from __future__ import annotations

from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import path, star, weighted_trees
from oracles import naive_edge_opt, naive_opt
from treesearch.baseline import centroid_strategy_execute, centroid_traces
from treesearch.exact import (
    CapExceeded,
    edge_opt_oracle,
    opt_oracle,
    path_opt,
    path_order,
    policy_chooser,
)
from treesearch.exactlog import ceil_log2, ceil_sqrt_log2, leq_log2
from treesearch.gen import generate, random_edge_tree
from treesearch.strategy import FOUND, explore
from treesearch.tree import EdgeWeightedTree, WeightedTree, normalize


class TestOracle:
    def test_singleton(self):
        assert opt_oracle(path([1])).value == 0

    @pytest.mark.parametrize("n", [2, 5, 14])
    def test_unit_star(self, n):
        assert opt_oracle(star(n)).value == 1

    def test_unit_paths(self):
        assert opt_oracle(path([1] * 4)).value == 2
        assert opt_oracle(path([1] * 8)).value == 3

    def test_cap(self):
        with pytest.raises(CapExceeded):
            opt_oracle(path([1] * 15))
        assert opt_oracle(path([1] * 3), cap=3).value == 1

    @settings(max_examples=60, deadline=None)
    @given(weighted_trees(max_n=8))
    def test_matches_reference(self, t):
        assert opt_oracle(t).value == naive_opt(list(t.parent), t.weight)

    @settings(max_examples=40, deadline=None)
    @given(weighted_trees(max_n=8))
    def test_policy_replay(self, t):
        res = opt_oracle(t)
        traces = explore(t, policy_chooser(res))
        assert max(tr.cost for tr in traces.values()) == res.value
        for x, tr in traces.items():
            assert tr.steps[-1].reply == FOUND if x in tr.queries else True

    @settings(max_examples=40, deadline=None)
    @given(weighted_trees(max_n=8), st.data())
    def test_monotone_in_weights(self, t, data):
        v = data.draw(st.integers(0, t.n - 1))
        extra = F(data.draw(st.integers(1, 5)), data.draw(st.integers(1, 5)))
        w = list(t.weight)
        w[v] += extra
        assert opt_oracle(t.with_weights(w)).value >= opt_oracle(t).value


class TestPathOpt:
    def test_unit_eight(self):
        assert path_opt(path([1] * 8)).value == 3 == opt_oracle(path([1] * 8)).value

    def test_two_path(self):
        assert path_opt(path([1, F(1, 2)])).value == F(1, 2)

    def test_singleton(self):
        assert path_opt(path([1])).value == 0

    def test_rooted_in_the_middle(self):
        t = WeightedTree.from_parents([None, 0, 0, 2], [1, F(1, 3), F(1, 2), 1])
        assert path_order(t) in ([1, 0, 2, 3], [3, 2, 0, 1])
        assert path_opt(t).value == opt_oracle(t).value

    def test_non_path(self):
        with pytest.raises(ValueError):
            path_opt(star(4))

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.fractions(min_value=F(1, 8), max_value=2, max_denominator=8), min_size=1, max_size=10))
    def test_equals_oracle(self, ws):
        t = path(ws)
        res = path_opt(t)
        assert res.value == opt_oracle(t).value
        traces = explore(t, policy_chooser(res))
        assert max(tr.cost for tr in traces.values()) == res.value


class TestEdgeOracle:
    def test_single_vertex(self):
        assert edge_opt_oracle(EdgeWeightedTree.from_parents([None], [None])) == 0

    def test_one_edge(self):
        assert edge_opt_oracle(EdgeWeightedTree.from_parents([None, 0], [None, 2])) == 2

    def test_three_unit_edges(self):
        e = EdgeWeightedTree.from_parents([None, 0, 1, 2], [None, 1, 1, 1])
        assert edge_opt_oracle(e) == 2

    def test_cap(self):
        e = EdgeWeightedTree.from_parents([None] + list(range(14)), [None] + [1] * 14)
        with pytest.raises(CapExceeded):
            edge_opt_oracle(e)

    @pytest.mark.parametrize("seed", range(15))
    def test_matches_reference(self, seed):
        e = random_edge_tree(1 + seed % 7, seed)
        assert edge_opt_oracle(e) == naive_edge_opt(list(e.parent), [w or 0 for w in e.weight])


class TestCentroidBaseline:
    def test_singleton(self):
        assert centroid_strategy_execute(path([1]), 0).queries == []

    def test_unit_path_eight(self):
        t = path([1] * 8)
        assert all(len(centroid_strategy_execute(t, x).queries) <= 3 for x in range(8))

    def test_unit_star(self):
        t = star(7)
        assert all(len(centroid_strategy_execute(t, x).queries) == 1 for x in range(7))

    @pytest.mark.parametrize("seed", range(10))
    def test_log_bound_and_agreement(self, seed):
        n = 2 + seed * 13
        t = normalize(generate("random", n, "uniform", seed))
        traces = centroid_traces(t)
        for x in range(n):
            tr = traces[x]
            assert tr.queries == centroid_strategy_execute(t, x).queries
            assert len(tr.queries) <= ceil_log2(n)
            assert tr.cost <= ceil_log2(n)


class TestExactLog:
    @pytest.mark.parametrize("n, k", [(1, 0), (2, 1), (3, 2), (4, 2), (5, 3), (512, 9), (513, 10)])
    def test_ceil_log2(self, n, k):
        assert ceil_log2(n) == k

    @pytest.mark.parametrize("n, k", [(1, 0), (2, 1), (3, 2), (16, 2), (17, 3), (512, 3), (5000, 4)])
    def test_ceil_sqrt_log2(self, n, k):
        assert ceil_sqrt_log2(n) == k

    def test_leq_log2(self):
        assert leq_log2(3, 8) and not leq_log2(F(301, 100), 8)
        assert leq_log2(F(2321, 1000), 5) and not leq_log2(F(2322, 1000), 5)
        assert leq_log2(0, 1) and not leq_log2(F(1, 1000), 1)
