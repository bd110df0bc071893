"""Search strategies for locating a hidden vertex in a node-weighted tree."""

from .kernels import BACKEND
from .tree import (
    EdgeWeightedTree,
    SubtreeView,
    TreeError,
    WeightedTree,
    normalize,
    parse_tree,
    serialize_tree,
)

__all__ = [
    "BACKEND",
    "EdgeWeightedTree",
    "SubtreeView",
    "TreeError",
    "WeightedTree",
    "normalize",
    "parse_tree",
    "serialize_tree",
]
__version__ = "0.1.0"
