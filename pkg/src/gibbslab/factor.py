"""Finite-radius block codes, empirical distributions and the edge-vertex slack."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .gibbs import ENUMERATION_CAP, CapExceeded
from .graph import niceness_audit
from .info import entropy, tv_distance
from .tables import DistTable
from .tree import ball_measure, edge_union_shape, tree_ball_shape


class InconsistentMarginals(ValueError):
    pass


# --------------------------------------------------------------------------
# patterns
#
# A pattern is the labeled radius-r ball around a vertex of a tree, written as
# a nested tuple ``(label, (child, child, ...))`` with children sorted.  The
# sort makes any rule defined on patterns invariant under tree automorphisms
# fixing the center.


def pattern_at(neighbors, labels, center, r):
    """Canonical radius-``r`` pattern around ``center`` via non-backtracking expansion."""

    def rec(x, parent, depth):
        if depth == r:
            return (int(labels[x]), ())
        kids = sorted(rec(int(y), x, depth + 1) for y in neighbors(x) if y != parent)
        return (int(labels[x]), tuple(kids))

    return rec(center, -1, 0)


def format_pattern(pat):
    label, kids = pat
    if not kids:
        return str(label)
    return f"{label}(" + ",".join(format_pattern(k) for k in kids) + ")"


def parse_pattern(text):
    pos = 0

    def rec():
        nonlocal pos
        start = pos
        while pos < len(text) and text[pos].isdigit():
            pos += 1
        label = int(text[start:pos])
        kids = []
        if pos < len(text) and text[pos] == "(":
            pos += 1
            while True:
                kids.append(rec())
                if text[pos] == ",":
                    pos += 1
                    continue
                if text[pos] == ")":
                    pos += 1
                    break
        return (label, tuple(sorted(kids)))

    pat = rec()
    if pos != len(text):
        raise ValueError(f"trailing characters in pattern {text!r}")
    return pat


def _tree_neighbors(parent):
    adj = [[] for _ in parent]
    for i, p in enumerate(parent):
        if p >= 0:
            adj[p].append(i)
            adj[i].append(int(p))
    return lambda x: adj[x]


def tree_patterns(d, r, q):
    """All canonical patterns on the radius-``r`` ball of ``T_d`` over ``q`` symbols."""
    parent = tree_ball_shape(d, r)
    nbrs = _tree_neighbors(parent)
    pats = set()
    for labels in itertools.product(range(q), repeat=len(parent)):
        pats.add(pattern_at(nbrs, labels, 0, r))
    return sorted(pats)


# --------------------------------------------------------------------------
# block codes


class BlockCode:
    """Radius-``r`` local rule from ``in_alphabet`` colorings to ``out_alphabet``.

    ``rule`` is either a callable on canonical patterns or a dict mapping
    canonical patterns to output symbol indices.  ``default`` is the output
    at vertices whose ``r``-ball in a finite covering is not tree-like.
    """

    def __init__(self, in_alphabet, out_alphabet, radius, rule, default=0, name="custom"):
        self.in_alphabet = tuple(in_alphabet)
        self.out_alphabet = tuple(out_alphabet)
        self.radius = int(radius)
        if self.radius < 0:
            raise ValueError("radius must be nonnegative")
        if not 0 <= default < len(self.out_alphabet):
            raise ValueError("default symbol outside the output alphabet")
        self.default = int(default)
        self.name = name
        self._table = dict(rule) if isinstance(rule, dict) else None
        self._rule = None if isinstance(rule, dict) else rule
        self._cache = {}

    def __call__(self, pattern):
        try:
            return self._cache[pattern]
        except KeyError:
            pass
        if self._table is not None:
            out = self._table[pattern]
        else:
            out = int(self._rule(pattern))
        if not 0 <= out < len(self.out_alphabet):
            raise ValueError(f"rule produced symbol {out} outside the output alphabet")
        self._cache[pattern] = out
        return out

    def tabulate(self, d):
        """Table form of the rule on every radius-``r`` pattern of ``T_d``."""
        table = {p: self(p) for p in tree_patterns(d, self.radius, len(self.in_alphabet))}
        return BlockCode(self.in_alphabet, self.out_alphabet, self.radius, table,
                         self.default, self.name)

    def __repr__(self):
        return f"BlockCode({self.name!r}, r={self.radius})"


def identity_code(alphabet):
    return BlockCode(alphabet, alphabet, 0, lambda pat: pat[0], 0, "identity")


def constant_code(in_alphabet, out_alphabet=(0,), symbol=0):
    return BlockCode(in_alphabet, out_alphabet, 0, lambda pat: symbol, symbol, "constant")


def _majority(pat):
    center, kids = pat
    counts = {}
    for label, _ in kids:
        counts[label] = counts.get(label, 0) + 1
    if not counts:
        return center
    top = max(counts.values())
    tied = [a for a, c in counts.items() if c == top]
    # ties: keep the center's symbol if it is among the leaders, else the smallest
    return center if center in tied else min(tied)


def majority_code(alphabet):
    """Radius-1 rule: most frequent neighbor symbol."""
    return BlockCode(alphabet, alphabet, 1, _majority, 0, "majority")


def builtin_code(name, alphabet):
    if name == "identity":
        return identity_code(alphabet)
    if name == "constant":
        return constant_code(alphabet)
    if name == "majority":
        return majority_code(alphabet)
    raise ValueError(f"unknown block code {name!r}")


def write_block_code(code, path, d):
    table = code.tabulate(d)._table
    lines = [f"# {code.name} block code on T_{d}",
             f"radius {code.radius}",
             "in " + " ".join(map(str, code.in_alphabet)),
             "out " + " ".join(map(str, code.out_alphabet)),
             f"default {code.default}"]
    lines += [f"{format_pattern(p)} -> {s}" for p, s in sorted(table.items())]
    Path(path).write_text("\n".join(lines) + "\n")


def read_block_code(path):
    meta = {}
    table = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "->" in line:
            pat, sym = line.split("->")
            table[parse_pattern(pat.strip())] = int(sym)
        else:
            key, _, rest = line.partition(" ")
            meta[key] = rest.split()
    return BlockCode(meta["in"], meta["out"], int(meta["radius"][0]), table,
                     int(meta.get("default", ["0"])[0]), Path(path).stem)


# --------------------------------------------------------------------------
# application to coverings


def apply_block_code(cov, coloring, code, nice=None):
    """Output coloring of the covering: rule at ``r``-nice vertices, default elsewhere.

    ``nice`` may pass a precomputed per-vertex niceness mask.
    """
    g = cov.graph
    x = np.asarray(coloring, dtype=np.int64)
    if x.shape != (g.n,):
        raise ValueError("coloring must cover every vertex of the covering")
    r = code.radius
    if r == 0:
        lut = np.array([code((a, ())) for a in range(len(code.in_alphabet))], dtype=np.int64)
        return lut[x]
    if nice is None:
        nice = niceness_audit(cov, r).nice
    out = np.full(g.n, code.default, dtype=np.int64)
    deg = g.degree()
    if r == 1 and np.all(deg == deg[0]):
        # one pattern per (center, sorted neighbor labels) row
        nb = np.sort(x[g.indices].reshape(g.n, deg[0]), axis=1)
        keys = np.concatenate([x[:, None], nb], axis=1)
        uniq, inv = np.unique(keys, axis=0, return_inverse=True)
        vals = np.array([code((int(row[0]), tuple((int(b), ()) for b in row[1:])))
                         for row in uniq], dtype=np.int64)
        res = vals[np.asarray(inv).ravel()]
        out[nice] = res[nice]
        return out
    ip, ind = g.indptr, g.indices
    nbrs = lambda v: ind[ip[v]:ip[v + 1]].tolist()  # noqa: E731
    for v in np.flatnonzero(nice).tolist():
        out[v] = code(pattern_at(nbrs, x, v, r))
    return out


@dataclass(frozen=True)
class EmpiricalPair:
    """Fiber frequency tables of a coloring of an ``N``-fold covering."""

    N: int
    vertex_counts: np.ndarray  # (n_base, q)
    edge_counts: np.ndarray    # (m_base, q, q), rows over the smaller endpoint
    alphabet: tuple

    @property
    def vertex(self):
        return [DistTable((v,), self.alphabet, c / self.N) for v, c in enumerate(self.vertex_counts)]

    @property
    def edge(self):
        return [DistTable(("u", "v"), self.alphabet, c / self.N) for c in self.edge_counts]

    def marginal_mismatch(self, base):
        """Largest integer count discrepancy between edge marginals and vertex counts."""
        worst = 0
        for e, (u, v) in enumerate(base.edges.tolist()):
            worst = max(worst,
                        int(np.abs(self.edge_counts[e].sum(axis=1) - self.vertex_counts[u]).max()),
                        int(np.abs(self.edge_counts[e].sum(axis=0) - self.vertex_counts[v]).max()))
        return worst


def empirical_dists(cov, coloring, alphabet):
    x = np.asarray(coloring, dtype=np.int64)
    q = len(tuple(alphabet))
    n = cov.base.n
    vc = np.zeros((n, q), dtype=np.int64)
    np.add.at(vc, (np.arange(len(x)) % n, x), 1)
    slot = cov.lift_base * q * q + x[cov.lift_a] * q + x[cov.lift_b]
    ec = np.bincount(slot, minlength=cov.base.m * q * q).reshape(cov.base.m, q, q)
    return EmpiricalPair(cov.N, vc, ec, tuple(alphabet))


# --------------------------------------------------------------------------
# exact factor marginals on the tree


def _push_forward(table, parent, code, centers):
    nbrs = _tree_neighbors(parent)
    qb = len(code.out_alphabet)
    out = np.zeros((qb,) * len(centers))
    probs = table.probs
    for labels in itertools.product(range(table.q), repeat=len(parent)):
        w = probs[labels]
        if w == 0:
            continue
        key = tuple(code(pattern_at(nbrs, labels, c, code.radius)) for c in centers)
        out[key] += w
    return out


def factor_marginals_exact(chain, code, cap=ENUMERATION_CAP):
    """Vertex and edge laws of the factor ``code`` applied to the tree chain."""
    d, r = chain.d, code.radius
    v_shape = tree_ball_shape(d, r)
    e_shape = edge_union_shape(d, r)
    if chain.q ** len(e_shape) > cap:
        raise CapExceeded(f"{chain.q}^{len(e_shape)} states exceed the enumeration cap {cap}")
    mu_v = _push_forward(ball_measure(chain, v_shape, cap), v_shape, code, (0,))
    mu_e = _push_forward(ball_measure(chain, e_shape, cap), e_shape, code, (0, 1))
    return (DistTable(("v",), code.out_alphabet, mu_v / mu_v.sum()),
            DistTable(("u", "v"), code.out_alphabet, mu_e / mu_e.sum()))


def edge_vertex_slack(g, mu_v, mu_e, tol=1e-9):
    """``sum_e H(mu_e) - sum_v (deg v - 1) H(mu_v)`` after a consistency check.

    ``mu_v[v]`` is the law at base vertex ``v``; ``mu_e[e]`` the law on base
    edge ``g.edges[e]`` with its first axis over the smaller endpoint.
    """
    if len(mu_v) != g.n or len(mu_e) != g.m:
        raise ValueError("need one vertex table per vertex and one edge table per edge")
    for e, (u, v) in enumerate(g.edges.tolist()):
        pe = np.asarray(getattr(mu_e[e], "probs", mu_e[e]))
        for axis, w in ((1, u), (0, v)):
            gap = tv_distance(pe.sum(axis=axis), np.asarray(getattr(mu_v[w], "probs", mu_v[w])))
            if gap > tol:
                raise InconsistentMarginals(
                    f"edge {(u, v)} marginal at {w} is off by {gap:.3g} in TV")
    deg = g.degree()
    lhs = sum((deg[v] - 1) * entropy(mu_v[v]) for v in range(g.n))
    rhs = sum(entropy(t) for t in mu_e)
    return float(rhs - lhs)
