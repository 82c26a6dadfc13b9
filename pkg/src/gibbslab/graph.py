"""Finite graphs, universal-cover balls, random N-fold coverings, niceness audits."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .rng import make_rng, uniforms


class GraphError(ValueError):
    pass


class SelfLoop(GraphError):
    pass


class DuplicateEdge(GraphError):
    pass


class Disconnected(GraphError):
    pass


class Graph:
    """Simple undirected graph on vertices ``0..n-1``.

    Edges are stored canonically oriented (smaller endpoint first) in input
    order.  Adjacency is kept in CSR form; arc ``k`` of vertex ``v`` points to
    ``indices[k]`` along base edge ``arc_edge[k]``, and ``arc_forward[k]`` is
    true when ``v`` is the first (smaller) endpoint of that edge.

    Use :func:`build_graph` for validated construction.  The raw constructor
    skips the connectivity check so covering graphs (often disconnected) can
    reuse the class.
    """

    def __init__(self, n, edges):
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        lo = np.minimum(edges[:, 0], edges[:, 1])
        hi = np.maximum(edges[:, 0], edges[:, 1])
        self.n = int(n)
        self.edges = np.stack([lo, hi], axis=1)
        m = len(self.edges)
        src = np.concatenate([lo, hi])
        dst = np.concatenate([hi, lo])
        eid = np.concatenate([np.arange(m), np.arange(m)])
        fwd = np.concatenate([np.ones(m, bool), np.zeros(m, bool)])
        order = np.lexsort((dst, src))
        self.indices = dst[order]
        self.arc_edge = eid[order]
        self.arc_forward = fwd[order]
        counts = np.bincount(src, minlength=self.n)
        self.indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
        for arr in (self.edges, self.indices, self.arc_edge, self.arc_forward, self.indptr):
            arr.flags.writeable = False

    @property
    def m(self):
        return len(self.edges)

    def degree(self, v=None):
        deg = np.diff(self.indptr)
        return deg if v is None else int(deg[v])

    def neighbors(self, v):
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def edge_index(self, u, v):
        """Index of edge ``{u, v}`` in :attr:`edges`."""
        start, stop = self.indptr[u], self.indptr[u + 1]
        k = start + np.searchsorted(self.indices[start:stop], v)
        if k >= stop or self.indices[k] != v:
            raise KeyError((u, v))
        return int(self.arc_edge[k])

    def is_connected(self):
        seen = np.zeros(self.n, bool)
        seen[0] = True
        stack = [0]
        while stack:
            x = stack.pop()
            for y in self.neighbors(x):
                if not seen[y]:
                    seen[y] = True
                    stack.append(int(y))
        return bool(seen.all())

    def is_regular(self):
        deg = self.degree()
        return bool(np.all(deg == deg[0]))

    def __eq__(self, other):
        return (isinstance(other, Graph) and self.n == other.n
                and np.array_equal(self.edges, other.edges))

    def __hash__(self):
        return hash((self.n, self.edges.tobytes()))

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"


def build_graph(edge_list):
    """Validated :class:`Graph` from a nonempty list of vertex pairs.

    Vertex ids must be exactly ``0..n-1``.  Raises :class:`SelfLoop`,
    :class:`DuplicateEdge` or :class:`Disconnected`.
    """
    pairs = [(int(u), int(v)) for u, v in edge_list]
    if not pairs:
        raise GraphError("edge list is empty")
    seen = set()
    for u, v in pairs:
        if u == v:
            raise SelfLoop(f"self-loop at vertex {u}")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise DuplicateEdge(f"duplicate edge {key}")
        seen.add(key)
    verts = {x for e in pairs for x in e}
    n = max(verts) + 1
    if min(verts) < 0 or len(verts) != n:
        raise GraphError("vertex ids must form 0..n-1")
    g = Graph(n, pairs)
    if not g.is_connected():
        raise Disconnected("graph is not connected")
    return g


def complete_graph(n):
    return build_graph([(i, j) for i in range(n) for j in range(i + 1, n)])


def cycle_graph(n):
    return build_graph([(i, (i + 1) % n) for i in range(n)])


def path_graph(n):
    return build_graph([(i, i + 1) for i in range(n - 1)])


def petersen_graph():
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return build_graph(outer + spokes + inner)


NAMED_GRAPHS = {
    "K2": lambda: complete_graph(2),
    "K3": lambda: complete_graph(3),
    "C3": lambda: cycle_graph(3),
    "K4": lambda: complete_graph(4),
    "C4": lambda: cycle_graph(4),
    "P3": lambda: path_graph(3),
    "petersen": petersen_graph,
}


def read_edge_list(path):
    """Read ``u v`` pairs, one per line; ``#`` starts a comment."""
    pairs = []
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        u, v = line.split()
        pairs.append((int(u), int(v)))
    return build_graph(pairs)


def write_edge_list(g, path):
    lines = [f"# {g.n} vertices, {g.m} edges"]
    lines += [f"{u} {v}" for u, v in g.edges.tolist()]
    Path(path).write_text("\n".join(lines) + "\n")


def load_graph(source):
    """Named graph (``K4``, ``petersen``, ...) or edge-list file path."""
    if source in NAMED_GRAPHS:
        return NAMED_GRAPHS[source]()
    return read_edge_list(source)


# --------------------------------------------------------------------------
# universal cover balls


@dataclass(frozen=True)
class RootedBall:
    """Radius-``R`` ball of the universal cover around a trivial path.

    Node 0 is the root.  ``parent[i]`` is the parent of node ``i`` (``-1`` for
    the root), ``depth[i]`` its distance from the root and ``projection[i]``
    the endpoint in the base graph of the non-backtracking path it stands for.
    """

    root: int
    radius: int
    parent: np.ndarray
    depth: np.ndarray
    projection: np.ndarray

    def __len__(self):
        return len(self.parent)

    @property
    def tree_edges(self):
        return [(int(p), i) for i, p in enumerate(self.parent.tolist()) if p >= 0]


def universal_cover_ball(g, root, R):
    if not 0 <= root < g.n:
        raise GraphError(f"invalid root {root}")
    if R < 0:
        raise GraphError("radius must be nonnegative")
    parent = [-1]
    depth = [0]
    proj = [int(root)]
    # previous base vertex on the path, to forbid backtracking
    prev = [-1]
    queue = deque([0])
    while queue:
        i = queue.popleft()
        if depth[i] == R:
            continue
        for w in g.neighbors(proj[i]).tolist():
            if w == prev[i]:
                continue
            parent.append(i)
            depth.append(depth[i] + 1)
            proj.append(w)
            prev.append(proj[i])
            queue.append(len(parent) - 1)
    return RootedBall(int(root), int(R), np.array(parent), np.array(depth), np.array(proj))


def cover_ball_sizes(g, R):
    """``|Ball(root, R)|`` in the universal cover for every base vertex.

    Counts non-backtracking paths of length at most ``R`` by dynamic
    programming over directed arcs; never materializes the ball.
    """
    src = np.repeat(np.arange(g.n), g.degree())
    dst = g.indices
    # arcs continuing a -> b without backtracking: b -> c with c != a
    walks = np.ones(len(dst), dtype=np.int64)  # paths of length 1 ending with each arc
    sizes = np.ones(g.n, dtype=np.int64)
    arc_id = {(int(a), int(b)): k for k, (a, b) in enumerate(zip(src, dst))}
    succ = [[arc_id[(int(b), int(c))] for c in g.neighbors(b) if c != a]
            for a, b in zip(src, dst)]
    for _ in range(R):
        np.add.at(sizes, dst, walks)  # reversal: paths ending at v = paths starting at v
        nxt = np.zeros_like(walks)
        for k, ks in enumerate(succ):
            if walks[k]:
                nxt[ks] += walks[k]
        walks = nxt
    return sizes


# --------------------------------------------------------------------------
# N-fold coverings


class NFoldCovering:
    """``N``-fold covering of ``base`` given by one permutation per base edge.

    Fiber index ``i`` is 0-based.  Vertex ``(i, v)`` has id ``i * n + v``, so
    ``q_N(x) = x % n``.  For base edge ``e = {u, v}`` with ``u < v`` the lifted
    edges are ``(i, u) ~ (perms[e][i], v)``.
    """

    def __init__(self, base, N, perms):
        perms = np.asarray(perms, dtype=np.int64).reshape(base.m, N)
        for p in perms:
            if not np.array_equal(np.sort(p), np.arange(N)):
                raise GraphError("each base edge needs a permutation of 0..N-1")
        self.base = base
        self.N = int(N)
        self.perms = perms
        self.perms.flags.writeable = False
        n = base.n
        i = np.arange(N)
        a = (i[None, :] * n + base.edges[:, 0:1]).ravel()
        b = (perms * n + base.edges[:, 1:2]).ravel()
        # lifted edge j sits over base edge lift_base[j]; a[j] over u, b[j] over v
        self.lift_a = a
        self.lift_b = b
        self.lift_base = np.repeat(np.arange(base.m), N)
        self.graph = Graph(N * n, np.stack([a, b], axis=1))

    @property
    def n_vertices(self):
        return self.N * self.base.n

    def project(self, x):
        return np.asarray(x) % self.base.n

    def fiber(self, v):
        return np.arange(self.N) * self.base.n + v

    def lifted_edges(self, e):
        """``(N, 2)`` array of lifted edges over base edge ``e``, rows ``(over u, over v)``."""
        sl = slice(e * self.N, (e + 1) * self.N)
        return np.stack([self.lift_a[sl], self.lift_b[sl]], axis=1)

    def relabel(self, fiber_perms):
        """Isomorphic covering with fiber indices permuted per base vertex.

        ``fiber_perms[v][i]`` is the new index of ``(i, v)``.  Returns the new
        covering and the vertex map ``old id -> new id``.
        """
        fp = np.asarray(fiber_perms, dtype=np.int64)
        n = self.base.n
        new_perms = np.empty_like(self.perms)
        for e, (u, v) in enumerate(self.base.edges.tolist()):
            new_perms[e, fp[u]] = fp[v][self.perms[e]]
        ids = np.arange(self.n_vertices)
        vmap = fp[ids % n, ids // n] * n + ids % n
        return NFoldCovering(self.base, self.N, new_perms), vmap

    def __eq__(self, other):
        return (isinstance(other, NFoldCovering) and self.base == other.base
                and self.N == other.N and np.array_equal(self.perms, other.perms))

    def __repr__(self):
        return f"NFoldCovering(base={self.base!r}, N={self.N})"


def random_covering(g, N, seed):
    """Uniform random ``N``-fold covering; one Fisher-Yates permutation per base edge."""
    if N < 1:
        raise GraphError("N must be at least 1")
    rng = make_rng(seed)
    perms = np.empty((g.m, N), dtype=np.int64)
    for e in range(g.m):
        perms[e] = kernels.fisher_yates(uniforms(rng, N))
    return NFoldCovering(g, N, perms)


def write_covering(c, path):
    lines = [f"# {c.N}-fold covering", f"N {c.N}", "[base]"]
    lines += [f"{u} {v}" for u, v in c.base.edges.tolist()]
    lines.append("[perms]")
    lines += [" ".join(map(str, p)) for p in c.perms.tolist()]
    Path(path).write_text("\n".join(lines) + "\n")


def read_covering(path):
    N = None
    section = None
    pairs, perms = [], []
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            section = line.strip("[]")
        elif line.startswith("N "):
            N = int(line.split()[1])
        elif section == "base":
            u, v = line.split()
            pairs.append((int(u), int(v)))
        elif section == "perms":
            perms.append([int(x) for x in line.split()])
    if N is None:
        raise GraphError("missing N line")
    return NFoldCovering(build_graph(pairs), N, perms)


# --------------------------------------------------------------------------
# niceness


@dataclass(frozen=True)
class NicenessReport:
    radius: int
    nice: np.ndarray              # per cover vertex
    vertex_fractions: np.ndarray  # per base vertex
    edge_fractions: np.ndarray    # per base edge

    def min_fraction(self):
        return float(min(self.vertex_fractions.min(), self.edge_fractions.min()))

    def is_nice(self, eps):
        """``(R, eps)``-niceness: every fiber fraction strictly above ``1 - eps``."""
        return bool(np.all(self.vertex_fractions > 1 - eps)
                    and np.all(self.edge_fractions > 1 - eps))


def niceness_audit(c, R):
    """Per-fiber fractions of ``R``-nice vertices and edges.

    A vertex is ``R``-nice when its radius-``R`` ball in the covering has as
    many vertices as the universal-cover ball over its base vertex.
    """
    if R < 1:
        raise GraphError("radius must be at least 1")
    n = c.base.n
    sizes = kernels.ball_sizes(c.graph.indptr, c.graph.indices, int(R))
    expected = cover_ball_sizes(c.base, R)
    nice = sizes.reshape(c.N, n) == expected[None, :]
    vertex_fractions = nice.mean(axis=0)
    flat = nice.ravel()
    both = flat[c.lift_a] & flat[c.lift_b]
    edge_fractions = both.reshape(c.base.m, c.N).mean(axis=1)
    return NicenessReport(int(R), flat, vertex_fractions, edge_fractions)
