"""Build script.

The compiled quadrature kernels are optional: when Cython (or a C compiler)
is unavailable the package installs without the extension and falls back to
the numpy kernels at import time.
"""

import os

from setuptools import setup

_PYX = os.path.join("src", "graphenergy", "_kernels.pyx")

ext_modules = []
if os.path.exists(_PYX):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [_PYX],
            compiler_directives={
                "language_level": "3",
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
            },
        )
    except ImportError:
        pass

setup(ext_modules=ext_modules)
