"""Kernel backend selection.

The compiled module is used when it has been built; set
``TREESEARCH_PURE_PYTHON=1`` to force the pure-Python fallback.
"""

import os

from . import _pykernels
from ._pykernels import OVF, StateCapExceeded

_impl = _pykernels
BACKEND = "python"
if not os.environ.get("TREESEARCH_PURE_PYTHON"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        pass

merge_level = _impl.merge_level
insert_level = _impl.insert_level
insert_one = _impl.insert_one
opt_masks = _impl.opt_masks
path_dp = _impl.path_dp

__all__ = [
    "BACKEND",
    "OVF",
    "StateCapExceeded",
    "merge_level",
    "insert_level",
    "insert_one",
    "opt_masks",
    "path_dp",
]
