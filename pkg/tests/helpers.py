"""Shared tree builders and hypothesis strategies."""

from __future__ import annotations

from fractions import Fraction

from hypothesis import strategies as st

from treesearch.tree import WeightedTree

ACCEPTANCE_LINES: list[str] = []


@st.composite
def parent_lists(draw, min_n=1, max_n=9):
    n = draw(st.integers(min_n, max_n))
    return [None] + [draw(st.integers(0, v - 1)) for v in range(1, n)]


@st.composite
def weighted_trees(draw, min_n=1, max_n=9, zero=False):
    parent = draw(parent_lists(min_n, max_n))
    lo = 0 if zero else 1
    weights = [Fraction(draw(st.integers(lo, 12)), draw(st.integers(1, 6))) for _ in parent]
    if not any(weights):
        weights[0] = Fraction(1)
    return WeightedTree.from_parents(parent, weights)


def path(weights):
    weights = [Fraction(w) for w in weights]
    return WeightedTree.from_parents([None] + list(range(len(weights) - 1)), weights)


def star(n, centre_weight=1, leaf_weight=1):
    return WeightedTree.from_parents(
        [None] + [0] * (n - 1), [Fraction(centre_weight)] + [Fraction(leaf_weight)] * (n - 1)
    )
