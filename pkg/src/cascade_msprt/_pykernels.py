"""Pure-numpy fallback kernels, API-identical to the compiled extension."""

import numpy as np


def segment_sums(values, flat, offsets):
    """out[i] = sum of values[flat[offsets[i]:offsets[i+1]]]."""
    nseg = len(offsets) - 1
    if nseg <= 0:
        return np.zeros(0, dtype=np.float64)
    gathered = values[flat]
    if gathered.size == 0:
        return np.zeros(nseg, dtype=np.float64)
    # Ball segments are always nonempty, which reduceat requires.
    return np.add.reduceat(gathered, offsets[:-1])


def _gather_neighbors(indptr, indices, frontier):
    starts = indptr[frontier]
    counts = indptr[frontier + 1] - starts
    total = int(counts.sum())
    if total == 0:
        return indices[:0]
    shift = np.repeat(starts - np.concatenate(([0], np.cumsum(counts)[:-1])), counts)
    return indices[shift + np.arange(total)]


def bfs_distances(indptr, indices, source, max_depth):
    n = len(indptr) - 1
    dist = np.full(n, -1, dtype=np.int32)
    dist[source] = 0
    frontier = np.array([source], dtype=np.int32)
    d = 0
    while frontier.size and (max_depth < 0 or d < max_depth):
        nbrs = _gather_neighbors(indptr, indices, frontier)
        new = np.unique(nbrs[dist[nbrs] < 0])
        d += 1
        dist[new] = d
        frontier = new.astype(np.int32)
    return dist


def truncated_bfs(indptr, indices, source, depth):
    n = len(indptr) - 1
    visited = np.zeros(n, dtype=bool)
    visited[source] = True
    levels = [np.array([source], dtype=np.int32)]
    frontier = levels[0]
    for _ in range(depth):
        nbrs = _gather_neighbors(indptr, indices, frontier)
        new = np.unique(nbrs[~visited[nbrs]]).astype(np.int32)
        if new.size == 0:
            break
        visited[new] = True
        levels.append(new)
        frontier = new
    order = np.concatenate(levels)
    offsets = np.zeros(len(levels) + 1, dtype=np.int64)
    offsets[1:] = np.cumsum([lv.size for lv in levels])
    return order, offsets
