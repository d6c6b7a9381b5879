"""Desk-scale maze testbed for vector-reward policy optimization."""

import os

# Pin BLAS thread pools before numpy is imported anywhere in the package.
# Multi-threaded GEMM reduces in nondeterministic order; single-threaded
# BLAS keeps every run bit-identical regardless of --threads.  Worker
# parallelism in this package happens above BLAS, with a canonical merge
# order, so this costs nothing.
for _var in (
    "OPENBLAS_NUM_THREADS",
    "MKL_NUM_THREADS",
    "OMP_NUM_THREADS",
    "NUMEXPR_NUM_THREADS",
    "VECLIB_MAXIMUM_THREADS",
):
    os.environ.setdefault(_var, "1")
del _var

__version__ = "0.1.0"
