"""Build script for the optional compiled kernels.

The Cython module is optional: if it cannot be built the package falls back
to the pure-Python kernels at import time.

    python setup.py build_ext --inplace
"""

import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("TREESEARCH_NO_EXT"):
    try:
        from Cython.Build import cythonize
    except ImportError:  # pragma: no cover - build without Cython
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "treesearch._ckernels",
                    ["src/treesearch/_ckernels.pyx"],
                    extra_compile_args=["-O2"],
                )
            ],
            compiler_directives={
                "language_level": "3",
                "boundscheck": False,
                "wraparound": False,
            },
        )

setup(ext_modules=ext_modules)
