"""Nearest-neighbor potentials, exact Gibbs measures, DLR checks and Glauber dynamics."""
from __future__ import annotations

import itertools
from pathlib import Path

import numpy as np

from . import kernels
from .graph import Graph
from .rng import integers_below, make_rng, uniforms
from .tables import DistTable

ENUMERATION_CAP = 2 ** 24


class CapExceeded(ValueError):
    pass


class IncompleteBoundary(ValueError):
    pass


class Potential:
    """Vertex fields ``h[v, a]`` and edge couplings ``J[e, a, b]`` on a graph.

    ``J[e]`` is oriented along ``graph.edges[e]`` (smaller endpoint first);
    the reversed orientation is ``J[e].T``.  The per-vertex energy is
    ``psi_v = h_v(w_v) + 1/2 * sum_{e ~ v} J_e``, so the total energy is
    ``sum_v h_v + sum_e J_e``.
    """

    def __init__(self, graph, alphabet, h, J):
        self.graph = graph
        self.alphabet = tuple(alphabet)
        q = len(self.alphabet)
        if q < 2:
            raise ValueError("alphabet needs at least two symbols")
        self.h = np.array(h, dtype=np.float64).reshape(graph.n, q)
        self.J = np.array(J, dtype=np.float64).reshape(graph.m, q, q)
        if not (np.all(np.isfinite(self.h)) and np.all(np.isfinite(self.J))):
            raise ValueError("potential tables must be finite")
        self.h.flags.writeable = False
        self.J.flags.writeable = False

    @classmethod
    def homogeneous(cls, graph, alphabet, field, pair):
        """Same field table at every vertex and same symmetric pair table on every edge."""
        pair = np.asarray(pair, dtype=np.float64)
        if not np.allclose(pair, pair.T, rtol=0, atol=1e-15):
            raise ValueError("homogeneous pair table must be symmetric")
        q = len(tuple(alphabet))
        h = np.broadcast_to(np.asarray(field, dtype=np.float64), (graph.n, q))
        J = np.broadcast_to(pair, (graph.m, q, q))
        return cls(graph, alphabet, h, J)

    @property
    def q(self):
        return len(self.alphabet)

    def pair(self, u, v):
        """Coupling table oriented from ``u`` to ``v``."""
        e = self.graph.edge_index(u, v)
        return self.J[e] if u < v else self.J[e].T

    def arc_tables(self):
        """``J`` laid out per CSR arc: ``out[k][a, b]`` couples ``a`` at the arc's
        source with ``b`` at its target."""
        g = self.graph
        tables = self.J[g.arc_edge]
        flip = ~g.arc_forward
        tables = tables.copy()
        tables[flip] = np.transpose(tables[flip], (0, 2, 1))
        return np.ascontiguousarray(tables)

    def psi(self, v, coloring):
        """Local energy of vertex ``v``; ``coloring`` maps vertices to symbol indices."""
        a = coloring[v]
        val = self.h[v, a]
        for w in self.graph.neighbors(v).tolist():
            val += 0.5 * self.pair(v, w)[a, coloring[w]]
        return float(val)

    def energy(self, coloring):
        x = np.asarray(coloring, dtype=np.int64)
        g = self.graph
        e_h = self.h[np.arange(g.n), x].sum()
        e_j = self.J[np.arange(g.m), x[g.edges[:, 0]], x[g.edges[:, 1]]].sum()
        return float(e_h + e_j)

    def same_as(self, other, atol=0.0):
        return (self.graph == other.graph and self.alphabet == other.alphabet
                and np.allclose(self.h, other.h, rtol=0, atol=atol)
                and np.allclose(self.J, other.J, rtol=0, atol=atol))


def spin_values(q=2):
    """Spin of each symbol for Ising: symbol ``a`` has spin ``2a - 1``."""
    return 2.0 * np.arange(q) - 1.0


def ising_tables(beta, field=0.0):
    """Single-site field and pair tables of the Ising model on symbols ``(0, 1)``.

    ``J(a, b) = -beta * s(a) s(b)`` (like spins favored for ``beta > 0``),
    ``h(a) = -field * s(a)`` with spins ``s = (-1, +1)``.
    """
    s = spin_values(2)
    return -field * s, -beta * np.outer(s, s)


def potts_tables(q, beta, field=0.0):
    """Potts tables: ``J(a, b) = -beta [a == b]``; ``field`` favors symbol 0."""
    h = np.zeros(q)
    h[0] = -field
    return h, -beta * np.eye(q)


def ising(graph, beta, field=0.0):
    h, J = ising_tables(beta, field)
    return Potential.homogeneous(graph, (0, 1), h, J)


def potts(graph, q, beta, field=0.0):
    h, J = potts_tables(q, beta, field)
    return Potential.homogeneous(graph, tuple(range(q)), h, J)


def read_potential(path, graph):
    """Parse the ``[alphabet]`` / ``[fields]`` / ``[pairs]`` text format.

    ``[alphabet]`` lists symbols separated by whitespace.  ``[fields]`` lines
    are ``vertex symbol value``; ``[pairs]`` lines are ``u v a b value`` and
    set ``J_{uv}(a, b)`` (and hence ``J_{vu}(b, a)``).  Unlisted entries are 0.
    """
    section = None
    alphabet = None
    fields, pairs = [], []
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            continue
        parts = line.split()
        if section == "alphabet":
            alphabet = (alphabet or ()) + tuple(parts)
        elif section == "fields":
            fields.append(parts)
        elif section == "pairs":
            pairs.append(parts)
        else:
            raise ValueError(f"line outside a known section: {raw!r}")
    if not alphabet:
        raise ValueError("missing [alphabet] section")
    index = {s: i for i, s in enumerate(alphabet)}
    q = len(alphabet)
    h = np.zeros((graph.n, q))
    J = np.zeros((graph.m, q, q))
    for v, a, val in fields:
        h[int(v), index[a]] = float(val)
    for u, v, a, b, val in pairs:
        u, v = int(u), int(v)
        e = graph.edge_index(u, v)
        if u < v:
            J[e, index[a], index[b]] = float(val)
        else:
            J[e, index[b], index[a]] = float(val)
    return Potential(graph, alphabet, h, J)


def write_potential(p, path):
    syms = [str(s) for s in p.alphabet]
    lines = ["[alphabet]", " ".join(syms), "[fields]"]
    for v in range(p.graph.n):
        for a in range(p.q):
            lines.append(f"{v} {syms[a]} {float(p.h[v, a])!r}")
    lines.append("[pairs]")
    for e, (u, v) in enumerate(p.graph.edges.tolist()):
        for a in range(p.q):
            for b in range(p.q):
                lines.append(f"{u} {v} {syms[a]} {syms[b]} {float(p.J[e, a, b])!r}")
    Path(path).write_text("\n".join(lines) + "\n")


# --------------------------------------------------------------------------
# exact measures


def energy_tensor(graph, p, cap=ENUMERATION_CAP):
    """Total energy of every coloring as an array of shape ``(q,) * n``."""
    n, q = graph.n, p.q
    if q ** n > cap:
        raise CapExceeded(f"{q}^{n} states exceed the enumeration cap {cap}")
    E = np.zeros((q,) * n)
    for v in range(n):
        shape = [1] * n
        shape[v] = q
        E += p.h[v].reshape(shape)
    for e, (u, v) in enumerate(graph.edges.tolist()):
        shape = [1] * n
        shape[u] = q
        shape[v] = q
        E += p.J[e].reshape(shape)
    return E


def brute_force_gibbs(graph, p, cap=ENUMERATION_CAP):
    """Exact Gibbs measure ``exp(-energy) / Z`` on all of ``A^V``."""
    E = energy_tensor(graph, p, cap)
    return DistTable.from_log_weights(range(graph.n), p.alphabet, -E)


def boundary(graph, region, radius):
    """Vertices outside ``region`` within graph distance ``radius`` of it."""
    region = set(region)
    seen = set(region)
    frontier = list(region)
    for _ in range(radius):
        nxt = []
        for x in frontier:
            for y in graph.neighbors(x).tolist():
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    return sorted(seen - region)


def conditional_table(p, graph, boundary_values, region):
    """Conditional law on ``region`` given the coloring on its 2-neighborhood.

    ``boundary_values`` maps vertices to symbol indices and must cover every
    vertex within distance 2 of ``region``.  The weight of ``s`` is
    ``exp(-sum psi_v(s + t))`` over ``v`` in the region and its 1-neighborhood.
    """
    region = tuple(region)
    if set(region) & set(boundary_values):
        raise ValueError("region and boundary must be disjoint")
    missing = [v for v in boundary(graph, region, 2) if v not in boundary_values]
    if missing:
        raise IncompleteBoundary(f"boundary lacks vertices {missing}")
    sites = list(region) + boundary(graph, region, 1)
    logw = np.empty((p.q,) * len(region))
    coloring = dict(boundary_values)
    for s in itertools.product(range(p.q), repeat=len(region)):
        coloring.update(zip(region, s))
        logw[s] = -sum(p.psi(v, coloring) for v in sites)
    return DistTable.from_log_weights(region, p.alphabet, logw)


def dlr_check(nu, p, graph, region):
    """Max deviation between ``nu``'s conditionals on ``region`` and the Gibbs formula.

    Runs over every coloring ``t`` of the 2-neighborhood with positive
    ``nu``-probability.
    """
    region = tuple(region)
    bnd = boundary(graph, region, 2)
    joint = nu.marginal(region + tuple(bnd))
    worst = 0.0
    for t in itertools.product(range(p.q), repeat=len(bnd)):
        cond = joint.conditional(bnd, t)
        if cond is None:
            continue
        ref = conditional_table(p, graph, dict(zip(bnd, t)), region)
        worst = max(worst, float(np.abs(cond.probs - ref.probs).max()))
    return worst


def markov_check(nu, graph, region):
    """Max gap between conditioning on the full exterior and on the 2-neighborhood.

    Zero (up to rounding) for a Gibbs measure of a nearest-neighbor potential.
    """
    region = tuple(region)
    bnd = tuple(boundary(graph, region, 2))
    outside = tuple(v for v in range(graph.n) if v not in region)
    near = nu.marginal(region + bnd)
    full = nu.marginal(region + outside)
    worst = 0.0
    for t in itertools.product(range(nu.q), repeat=len(outside)):
        c_full = full.conditional(outside, t)
        if c_full is None:
            continue
        tb = tuple(t[outside.index(v)] for v in bnd)
        c_near = near.conditional(bnd, tb)
        worst = max(worst, float(np.abs(c_full.probs - c_near.probs).max()))
    return worst


def heat_bath_kernel(graph, p, cap=2 ** 12):
    """Transition matrix of one random-site heat-bath update over all colorings.

    States are indexed in C order of the ``(q,) * n`` table.
    """
    n, q = graph.n, p.q
    S = q ** n
    if S > cap:
        raise CapExceeded(f"{S} states exceed the kernel cap {cap}")
    states = np.array(list(itertools.product(range(q), repeat=n)))
    K = np.zeros((S, S))
    strides = q ** np.arange(n - 1, -1, -1)
    arcs = p.arc_tables()
    for i, x in enumerate(states):
        for v in range(n):
            E = p.h[v].copy()
            for k in range(graph.indptr[v], graph.indptr[v + 1]):
                E += arcs[k][:, x[graph.indices[k]]]
            w = np.exp(-(E - E.min()))
            w /= w.sum()
            base = i - x[v] * strides[v]
            for a in range(q):
                K[i, base + a * strides[v]] += w[a] / n
    return K


# --------------------------------------------------------------------------
# Glauber dynamics


def _dedupe_rows(arr):
    """Distinct leading-axis slices of ``arr`` and the index of each row among them."""
    flat = np.ascontiguousarray(arr).reshape(len(arr), -1)
    # 1-D projection key, verified exactly; falls back to row-wise unique on collision
    key = flat @ np.linspace(1.0, 2.0, flat.shape[1]) + flat[:, 0] * np.pi
    _, first, inv = np.unique(key, return_index=True, return_inverse=True)
    inv = np.ravel(inv)
    if np.array_equal(flat[first][inv], flat):
        return arr[first], inv
    uniq, inv = np.unique(flat, axis=0, return_inverse=True)
    return uniq.reshape((-1,) + arr.shape[1:]), np.ravel(inv)


class GlauberSampler:
    """Single-site heat-bath dynamics with uniformly random site order.

    One sweep is ``n`` updates at independently uniform sites.  All
    randomness comes from one seeded stream, so a sampler is deterministic
    given its seed.
    """

    def __init__(self, graph, p, seed, state=None):
        self.graph = graph
        self.p = p
        self.rng = make_rng(seed)
        self._indptr = np.ascontiguousarray(graph.indptr, dtype=np.int64)
        self._indices = np.ascontiguousarray(graph.indices, dtype=np.int64)
        # distinct tables stored once; arcs and vertices refer to them by id
        tables, arc_tid = _dedupe_rows(p.arc_tables())
        fields, vertex_tid = _dedupe_rows(p.h)
        self._pair_tables = np.ascontiguousarray(tables)
        self._arc_tid = np.ascontiguousarray(np.ravel(arc_tid), dtype=np.int32)
        self._field_tables = np.ascontiguousarray(fields)
        self._vertex_tid = np.ascontiguousarray(np.ravel(vertex_tid), dtype=np.int32)
        if state is None:
            state = integers_below(self.rng, p.q, graph.n)
        self.state = np.ascontiguousarray(state, dtype=np.int64).copy()

    def sweep(self, count=1):
        n = self.graph.n
        k = n * int(count)
        sites = integers_below(self.rng, n, k)
        us = uniforms(self.rng, k)
        kernels.glauber_sweep(self.state, self._indptr, self._indices, self._arc_tid,
                              self._pair_tables, self._vertex_tid, self._field_tables,
                              sites, us)
        return self.state

    def run(self, sweeps):
        # chunk long runs to bound the size of the pre-drawn random arrays
        chunk = max(1, 2_000_000 // max(self.graph.n, 1))
        left = int(sweeps)
        while left > 0:
            step = min(chunk, left)
            self.sweep(step)
            left -= step
        return self.state


def glauber_sample(graph, p, sweeps, seed):
    """One coloring after ``sweeps`` sweeps from a uniform random start."""
    if sweeps < 1:
        raise ValueError("sweeps must be at least 1")
    return GlauberSampler(graph, p, seed).run(sweeps).copy()


def glauber_chain(graph, p, n_samples, seed, burn_in=100, thin=10):
    """``n_samples`` colorings from one chain, after ``burn_in`` sweeps, every ``thin`` sweeps."""
    sampler = GlauberSampler(graph, p, seed)
    sampler.run(burn_in)
    out = np.empty((n_samples, graph.n), dtype=np.int64)
    for i in range(n_samples):
        out[i] = sampler.sweep(thin)
    return out


# --------------------------------------------------------------------------
# coverings


def transfer_potential(p, cov):
    """Lift a potential on the base graph to the covering graph.

    Each cover vertex inherits the field of its base vertex and each lifted
    edge the coupling of its base edge, oriented consistently.
    """
    if cov.base != p.graph:
        raise ValueError("potential is not defined on the covering's base graph")
    g: Graph = cov.graph
    n = cov.base.n
    h = p.h[np.arange(g.n) % n]
    # lifted edge j joins lift_a[j] (over u) and lift_b[j] (over v), u < v in the base
    J_lift = p.J[cov.lift_base]
    flipped = cov.lift_a > cov.lift_b
    J_lift[flipped] = np.transpose(J_lift[flipped], (0, 2, 1))
    return Potential(g, p.alphabet, h, J_lift)
