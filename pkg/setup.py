"""Build script for the optional compiled kernels.

Without Cython or a C compiler the package still installs; the kernels
then run through the pure-Python fallback in ``geophase._pykernels``.
"""
import os

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None and not os.environ.get("GEOPHASE_NO_EXT"):
    ext_modules = cythonize(
        [
            Extension(
                "geophase._ckernels",
                sources=[os.path.join("src", "geophase", "_ckernels.pyx")],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "initializedcheck": False,
        },
    )

setup(ext_modules=ext_modules)
