"""Build the optional compiled kernels.

The package works without them; ``mmktd.kernels`` falls back to numpy.
"""
import os

import numpy as np
from setuptools import Extension, setup

ext_modules = []
if os.environ.get("MMKTD_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:  # pragma: no cover
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "mmktd._ckernels",
                    ["src/mmktd/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={
                "language_level": "3",
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
                "initializedcheck": False,
            },
        )

setup(ext_modules=ext_modules)
