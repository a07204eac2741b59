"""Finite host graphs: balanced trees, lines, lattices, plus distance/ball queries.

Vertices are numbered 0..N-1 in BFS order from the canonical root/center.
Graphs are immutable after construction and safe to share across workers;
the ball memo cache is append-only and recomputed per process.
"""

from dataclasses import dataclass, field

import numpy as np

from . import kernels

MAX_VERTICES = 2**31 - 1


class GraphSizeError(ValueError):
    pass


class InvalidVertexError(ValueError):
    pass


@dataclass(frozen=True)
class Graph:
    kind: str  # "regular_tree" | "line" | "lattice"
    params: tuple  # (k, height) | (length,) | (dim, side)
    indptr: np.ndarray  # int64, len N+1
    indices: np.ndarray  # int32, neighbor lists sorted ascending
    _ball_cache: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def vertex_count(self):
        return len(self.indptr) - 1

    def degree(self, v):
        return int(self.indptr[v + 1] - self.indptr[v])

    def neighbors(self, v):
        return self.indices[self.indptr[v] : self.indptr[v + 1]]

    def check_vertex(self, v):
        if not 0 <= v < self.vertex_count:
            raise InvalidVertexError(f"vertex {v} out of range [0, {self.vertex_count})")

    def __hash__(self):
        return hash((self.kind, self.params))

    def __eq__(self, other):
        return isinstance(other, Graph) and self.kind == other.kind and self.params == other.params


@dataclass(frozen=True)
class CandidateSet:
    """The first n vertices in BFS order from a center, ties broken by ascending id."""

    center: int
    ordered_vertices: np.ndarray  # int32
    distances: np.ndarray  # int32, distance of each entry to center

    @property
    def n(self):
        return len(self.ordered_vertices)


def _from_edges(kind, params, n_vertices, edges_u, edges_v):
    """Build a CSR adjacency from an undirected edge list."""
    src = np.concatenate([edges_u, edges_v])
    dst = np.concatenate([edges_v, edges_u])
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    indptr = np.zeros(n_vertices + 1, dtype=np.int64)
    np.add.at(indptr, src + 1, 1)
    indptr = np.cumsum(indptr)
    return Graph(kind, params, indptr, dst.astype(np.int32))


def build_regular_tree(k, height):
    """Balanced tree whose interior vertices have degree k.

    Every non-leaf vertex (the root included) has k-1 children; `height` is the
    number of levels, so the vertex count is ((k-1)^height - 1)/(k-2).
    Vertices are numbered level by level: children of i are (k-1)i+1..(k-1)i+(k-1).
    """
    if k < 3:
        raise ValueError("k must be >= 3")
    if height < 1:
        raise ValueError("height must be >= 1")
    b = k - 1
    count = (b**height - 1) // (b - 1)
    if count > MAX_VERTICES:
        raise GraphSizeError(f"tree(k={k}, height={height}) has {count} vertices")
    n = int(count)
    if n == 1:
        return Graph("regular_tree", (k, height), np.zeros(2, dtype=np.int64), np.zeros(0, dtype=np.int32))
    child = np.arange(1, n, dtype=np.int64)
    parent = (child - 1) // b
    return _from_edges("regular_tree", (k, height), n, parent, child)


def build_line(length):
    """Path graph with vertices numbered left to right."""
    if length < 2:
        raise ValueError("length must be >= 2")
    if length > MAX_VERTICES:
        raise GraphSizeError(f"line({length}) too large")
    u = np.arange(length - 1, dtype=np.int64)
    return _from_edges("line", (length,), length, u, u + 1)


def build_lattice(dim, side):
    """dim-dimensional grid with side^dim vertices and nearest-neighbor edges."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    if side < 2:
        raise ValueError("side must be >= 2")
    count = side**dim
    if count > MAX_VERTICES:
        raise GraphSizeError(f"lattice(dim={dim}, side={side}) has {count} vertices")
    n = int(count)
    ids = np.arange(n, dtype=np.int64)
    edges_u, edges_v = [], []
    stride = 1
    for _ in range(dim):
        coord = (ids // stride) % side
        mask = coord < side - 1
        edges_u.append(ids[mask])
        edges_v.append(ids[mask] + stride)
        stride *= side
    return _from_edges("lattice", (dim, side), n, np.concatenate(edges_u), np.concatenate(edges_v))


def _tree_depth(i, b):
    d = 0
    while i > 0:
        i = (i - 1) // b
        d += 1
    return d


def distance(g, u, v):
    """Shortest-path distance via the per-kind closed form (BFS-checked in tests)."""
    g.check_vertex(u)
    g.check_vertex(v)
    if u == v:
        return 0
    if g.kind == "line":
        return abs(int(u) - int(v))
    if g.kind == "lattice":
        dim, side = g.params
        d = 0
        a, bb = int(u), int(v)
        for _ in range(dim):
            d += abs(a % side - bb % side)
            a //= side
            bb //= side
        return d
    if g.kind == "regular_tree":
        b = g.params[0] - 1
        a, c = int(u), int(v)
        da, dc = _tree_depth(a, b), _tree_depth(c, b)
        steps = 0
        while da > dc:
            a = (a - 1) // b
            da -= 1
            steps += 1
        while dc > da:
            c = (c - 1) // b
            dc -= 1
            steps += 1
        while a != c:
            a = (a - 1) // b
            c = (c - 1) // b
            steps += 2
        return steps
    return int(kernels.bfs_distances(g.indptr, g.indices, u)[v])


def bfs_distance(g, u, v):
    """BFS reference path distance (oracle for the closed forms)."""
    g.check_vertex(u)
    g.check_vertex(v)
    return int(kernels.bfs_distances(g.indptr, g.indices, u)[v])


def distances_from(g, v):
    g.check_vertex(v)
    return kernels.bfs_distances(g.indptr, g.indices, v)


def _ball_levels(g, v, t):
    """(order, level_offsets) with order[:offsets[min(t,L)+1]] = ball(v, t)."""
    cached = g._ball_cache.get(v)
    if cached is None or (len(cached[1]) - 2 < t and cached[1][-1] < g.vertex_count):
        cached = kernels.truncated_bfs(g.indptr, g.indices, v, t)
        g._ball_cache[v] = cached
    return cached


def ball(g, v, t):
    """Sorted array of vertices within distance t of v."""
    g.check_vertex(v)
    if t < 0:
        raise ValueError("radius must be nonnegative")
    order, offsets = _ball_levels(g, v, t)
    end = offsets[min(t, len(offsets) - 2) + 1]
    return np.sort(order[:end])


def shell(g, v, t):
    """Vertices at distance exactly t from v (sorted)."""
    g.check_vertex(v)
    order, offsets = _ball_levels(g, v, t)
    if t > len(offsets) - 2:
        return order[:0]
    return np.sort(order[offsets[t] : offsets[t + 1]])


def candidate_set(g, v0, n):
    """First n vertices in BFS order from v0, ties at equal distance by ascending id."""
    g.check_vertex(v0)
    if not 1 <= n <= g.vertex_count:
        raise ValueError(f"n={n} must be in [1, {g.vertex_count}]")
    dist = distances_from(g, v0)
    order = np.lexsort((np.arange(g.vertex_count), dist))[:n]
    return CandidateSet(int(v0), order.astype(np.int32), dist[order].astype(np.int32))


def check_symmetry_assumption(g, u, v, t_max):
    """True iff |N_v(t)\\N_u(t)| = |N_u(t)\\N_v(t)| != 0 for all 0 <= t <= t_max."""
    if u == v:
        raise ValueError("u and v must be distinct")
    for t in range(t_max + 1):
        bu = ball(g, u, t)
        bv = ball(g, v, t)
        common = np.intersect1d(bu, bv, assume_unique=True).size
        du, dv = bu.size - common, bv.size - common
        if du != dv or du == 0:
            return False
    return True


def export_edge_list(g, path):
    """Debug export: one 'u v' pair per line, u < v, ascending."""
    with open(path, "w", newline="\n") as fh:
        for u in range(g.vertex_count):
            for v in g.neighbors(u):
                if u < v:
                    fh.write(f"{u} {v}\n")


def canonical_center(g):
    """Root for trees, middle vertex for lines, central cell for lattices."""
    if g.kind == "regular_tree":
        return 0
    if g.kind == "line":
        return (g.params[0] - 1) // 2
    if g.kind == "lattice":
        dim, side = g.params
        c = (side - 1) // 2
        return int(sum(c * side**i for i in range(dim)))
    return 0


class BallTable:
    """Per-candidate ball enumeration shared across trials on one graph.

    level_arrays(t) flattens every candidate's radius-t ball into one index
    array plus offsets, ready for the segment-sum kernel.
    """

    def __init__(self, graph, vertices):
        self.graph = graph
        self.vertices = np.asarray(vertices, dtype=np.int32)
        self._balls = {}  # v -> (order, offsets)
        self._depth = -1
        self._levels = {}  # t -> (flat, offsets)

    def _ensure_depth(self, t):
        if t <= self._depth:
            return
        g = self.graph
        for v in self.vertices:
            order, offsets = self._balls.get(int(v), (None, None))
            if order is None or (len(offsets) - 2 < t and offsets[-1] < g.vertex_count):
                self._balls[int(v)] = kernels.truncated_bfs(g.indptr, g.indices, int(v), t)
        self._depth = t

    def ball_of(self, v, t):
        self._ensure_depth(t)
        order, offsets = self._balls[int(v)]
        end = offsets[min(t, len(offsets) - 2) + 1]
        return order[:end]

    def level_arrays(self, t):
        cached = self._levels.get(t)
        if cached is not None:
            return cached
        self._ensure_depth(t)
        parts = [self.ball_of(v, t) for v in self.vertices]
        flat = np.concatenate(parts) if parts else np.zeros(0, dtype=np.int32)
        offsets = np.zeros(len(parts) + 1, dtype=np.int64)
        offsets[1:] = np.cumsum([p.size for p in parts])
        self._levels[t] = (flat, offsets)
        return flat, offsets

    def ball_sizes(self, t):
        _, offsets = self.level_arrays(t)
        return np.diff(offsets)
