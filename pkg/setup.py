"""Build script for the compiled rollout kernel.

The extension is optional: if it fails to build (no compiler, no Cython),
the package installs anyway and falls back to the pure-Python rollout at
import time.  Note: no -ffast-math here on purpose, the kernel must keep
IEEE-754 semantics so compiled and fallback lanes agree.
"""

import numpy as np
from setuptools import setup
from setuptools.extension import Extension

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext = Extension(
        "vpomaze.policy._rollout",
        ["src/vpomaze/policy/_rollout.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O2"],
        optional=True,
    )
    ext_modules = cythonize(
        [ext],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "initializedcheck": False,
        },
    )

setup(ext_modules=ext_modules)
