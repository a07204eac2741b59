# cython: language_level=3
"""Compiled hot kernels: segment sums over flattened ball lists and truncated BFS."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def segment_sums(double[::1] values, int[::1] flat, cnp.int64_t[::1] offsets):
    """out[i] = sum of values[flat[offsets[i]:offsets[i+1]]]."""
    cdef Py_ssize_t nseg = offsets.shape[0] - 1
    if nseg < 0:
        nseg = 0
    out = np.zeros(nseg, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i, j
    cdef double acc
    for i in range(nseg):
        acc = 0.0
        for j in range(offsets[i], offsets[i + 1]):
            acc += values[flat[j]]
        o[i] = acc
    return out


def bfs_distances(cnp.int64_t[::1] indptr, int[::1] indices, int source, int max_depth):
    """BFS distances from source; -1 for unreached. max_depth < 0 means unbounded."""
    cdef Py_ssize_t n = indptr.shape[0] - 1
    dist = np.full(n, -1, dtype=np.int32)
    cdef int[::1] d = dist
    queue = np.empty(n, dtype=np.int32)
    cdef int[::1] q = queue
    cdef Py_ssize_t head = 0, tail = 0
    cdef int v, w, dv
    cdef Py_ssize_t j
    d[source] = 0
    q[tail] = source
    tail += 1
    while head < tail:
        v = q[head]
        head += 1
        dv = d[v]
        if max_depth >= 0 and dv >= max_depth:
            continue
        for j in range(indptr[v], indptr[v + 1]):
            w = indices[j]
            if d[w] < 0:
                d[w] = dv + 1
                q[tail] = w
                tail += 1
    return dist


def truncated_bfs(cnp.int64_t[::1] indptr, int[::1] indices, int source, int depth):
    """BFS from source down to `depth` levels.

    Returns (order, level_offsets): order holds visited vertices grouped by
    level (levels not internally sorted); order[:level_offsets[t+1]] is the
    radius-t ball for t <= reached depth.
    """
    cdef Py_ssize_t n = indptr.shape[0] - 1
    visited = np.zeros(n, dtype=np.uint8)
    cdef cnp.uint8_t[::1] vis = visited
    order = np.empty(n, dtype=np.int32)
    cdef int[::1] q = order
    cdef Py_ssize_t head = 0, tail = 0, level_end
    cdef int v, w, lvl
    cdef Py_ssize_t j
    offsets = np.zeros(depth + 2, dtype=np.int64)
    cdef cnp.int64_t[::1] off = offsets
    vis[source] = 1
    q[tail] = source
    tail += 1
    off[1] = 1
    lvl = 0
    while lvl < depth:
        level_end = tail
        if head == level_end:
            break
        while head < level_end:
            v = q[head]
            head += 1
            for j in range(indptr[v], indptr[v + 1]):
                w = indices[j]
                if not vis[w]:
                    vis[w] = 1
                    q[tail] = w
                    tail += 1
        if tail == level_end:
            break  # graph exhausted before the requested depth
        lvl += 1
        off[lvl + 1] = tail
    return np.array(order[:tail]), np.array(offsets[: lvl + 2])
