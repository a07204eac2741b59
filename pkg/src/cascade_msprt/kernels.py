"""Kernel dispatch: compiled extension when available, numpy fallback otherwise.

Set CASCADE_MSPRT_PURE_PYTHON=1 to force the fallback (used by the benchmark
and the backend-equivalence tests).
"""

import os

import numpy as np

if os.environ.get("CASCADE_MSPRT_PURE_PYTHON"):
    from . import _pykernels as _impl

    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:  # extension not built
        from . import _pykernels as _impl

        BACKEND = "python"


def segment_sums(values, flat, offsets):
    return _impl.segment_sums(
        np.ascontiguousarray(values, dtype=np.float64),
        np.ascontiguousarray(flat, dtype=np.int32),
        np.ascontiguousarray(offsets, dtype=np.int64),
    )


def bfs_distances(indptr, indices, source, max_depth=-1):
    return _impl.bfs_distances(indptr, indices, int(source), int(max_depth))


def truncated_bfs(indptr, indices, source, depth):
    """Levels are sorted by vertex id so ball enumeration is deterministic."""
    order, offsets = _impl.truncated_bfs(indptr, indices, int(source), int(depth))
    for i in range(len(offsets) - 1):
        order[offsets[i] : offsets[i + 1]].sort()
    return order, offsets
