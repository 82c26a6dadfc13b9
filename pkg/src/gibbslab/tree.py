"""Unique Gibbs measures on the d-regular tree as tree-indexed Markov chains."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .gibbs import ENUMERATION_CAP, CapExceeded
from .info import entropy, mutual_information
from .rng import make_rng, uniforms
from .tables import DistTable

MAX_ITER = 20_000


class NotConverged(RuntimeError):
    pass


class InvariantViolation(ValueError):
    pass


@dataclass(frozen=True)
class TreeChain:
    """Root marginal ``pi`` and reversible transition matrix ``P`` on ``T_d``."""

    alphabet: tuple
    d: int
    pi: np.ndarray
    P: np.ndarray

    def __post_init__(self):
        pi = np.asarray(self.pi, dtype=np.float64)
        P = np.asarray(self.P, dtype=np.float64)
        object.__setattr__(self, "pi", pi)
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        if self.d < 3:
            raise ValueError("tree degree must be at least 3")
        if np.any(pi <= 0) or abs(pi.sum() - 1) > 1e-12:
            raise InvariantViolation("root marginal must be positive and sum to 1")
        if np.any(P < 0) or np.abs(P.sum(axis=1) - 1).max() > 1e-12:
            raise InvariantViolation("transition rows must be stochastic")
        if self.reversibility_residual() > 1e-10:
            raise InvariantViolation(
                f"chain is not reversible (residual {self.reversibility_residual():.3g})")

    @property
    def q(self):
        return len(self.alphabet)

    def edge_marginal(self):
        return self.pi[:, None] * self.P

    def reversibility_residual(self):
        M = self.edge_marginal()
        return float(np.abs(M - M.T).max())

    def stationarity_residual(self):
        return float(np.abs(self.pi @ self.P - self.pi).max())


@dataclass(frozen=True)
class BPResult:
    message: np.ndarray      # cavity marginal of a vertex given its subtree
    converged: bool
    unique: bool
    iterations: int
    residual: float
    fixed_points: tuple = ()


def _bp_map(log_m, expJ, h, d):
    # cavity update: m'(a) ~ exp(-h(a)) * (sum_b exp(-J(a,b)) m(b))^(d-1)
    m = np.exp(log_m - log_m.max())
    m /= m.sum()
    incoming = expJ @ m
    out = -h + (d - 1) * np.log(incoming)
    return out - out.max()


def _normalize_log(log_m):
    m = np.exp(log_m - log_m.max())
    return m / m.sum()


def _iterate(m0, expJ, h, d, tol, max_iter):
    """Iterate the cavity map from ``m0``.

    Stops when the estimated distance to the fixed point,
    ``residual / (1 - rate)`` with ``rate`` the observed contraction of
    successive residuals, drops below ``tol``.
    """
    m = np.asarray(m0, dtype=np.float64)
    log_m = np.log(m)
    damping = 1.0
    prev_res = np.inf
    stalls = 0
    res = np.inf
    for it in range(1, max_iter + 1):
        new = _normalize_log(_bp_map(log_m, expJ, h, d))
        if damping < 1.0:
            new = damping * new + (1 - damping) * m
        res = float(np.abs(new - m).max())
        m = new
        log_m = np.log(m)
        rate = res / prev_res if prev_res > 0 and np.isfinite(prev_res) else 0.0
        if res == 0.0 or (rate < 1.0 and res / (1.0 - rate) <= tol):
            return m, True, it, res
        if res >= prev_res:
            stalls += 1
            if stalls >= 5 and damping == 1.0:
                damping = 0.5
        prev_res = res
    return m, False, max_iter, res


def _two_cycle(m0, expJ, h, d, max_iter):
    """True when the undamped map settles into a period-2 orbit from ``m0``.

    Alternating fixed points correspond to non-unique measures that are
    invariant only under the even-distance automorphisms.
    """
    m = np.asarray(m0, dtype=np.float64)
    for _ in range(max_iter):
        m1 = _normalize_log(_bp_map(np.log(m), expJ, h, d))
        m2 = _normalize_log(_bp_map(np.log(m1), expJ, h, d))
        if np.abs(m2 - m).max() <= 1e-14:
            break
        m = m2
    return float(np.abs(m1 - m).max()) > 1e-8


def bp_solve(d, J, h, tol=1e-13, n_inits=8, seed=0, max_iter=MAX_ITER):
    """Fixed point of the cavity recursion on ``T_d`` and a uniqueness verdict.

    Starts from ``q`` near-point-mass messages (one per symbol) followed by
    random Dirichlet starts, ``max(n_inits, q)`` in total.  The verdict is
    true when every start converges to the same fixed point within
    ``10 * tol`` and no point-mass start falls into a period-2 orbit of the
    undamped map.  Oscillation triggers damping by 0.5.
    """
    J = np.asarray(J, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    q = len(h)
    if d < 3:
        raise ValueError("d must be at least 3")
    if n_inits < 2 or tol <= 0:
        raise ValueError("need n_inits >= 2 and tol > 0")
    if not np.allclose(J, J.T, rtol=0, atol=1e-15):
        raise ValueError("pair table must be symmetric")
    expJ = np.exp(-(J - J.min()))
    rng = make_rng(seed)
    starts = []
    for a in range(q):
        m0 = np.full(q, 0.01 / max(q - 1, 1))
        m0[a] = 0.99
        starts.append(m0)
    while len(starts) < max(n_inits, q):
        g = -np.log(1.0 - uniforms(rng, q))  # Exp(1) draws -> flat Dirichlet
        starts.append(g / g.sum())
    results = [_iterate(m0, expJ, h, d, tol, max_iter) for m0 in starts]
    done = [r for r in results if r[1]]
    if not results[0][1]:
        raise NotConverged(f"BP did not converge in {max_iter} iterations "
                           f"(residual {results[0][3]:.3g})")
    m_ref = results[0][0]
    unique = len(done) == len(results) and all(
        np.abs(r[0] - m_ref).max() <= 10 * tol for r in done)
    if unique:
        unique = not any(_two_cycle(m0, expJ, h, d, max_iter) for m0 in starts[:q])
    distinct = []
    for r in done:
        if not any(np.abs(r[0] - f).max() <= 1e-8 for f in distinct):
            distinct.append(r[0])
    return BPResult(m_ref, True, bool(unique), max(r[2] for r in results),
                    results[0][3], tuple(distinct))


def chain_from_bp(bp, d, J, h, alphabet=None):
    """Tree-indexed Markov chain of the Gibbs measure selected by ``bp``.

    With cavity marginal ``m`` and incoming message ``M(a) = sum_b exp(-J(a,b)) m(b)``:
    ``pi(a) ~ exp(-h(a)) M(a)^d`` and ``P(a, b) ~ exp(-J(a, b)) m(b)``.
    """
    if not bp.converged:
        raise NotConverged("BP result did not converge")
    J = np.asarray(J, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    q = len(h)
    m = np.asarray(bp.message, dtype=np.float64)
    expJ = np.exp(-(J - J.min()))
    M = expJ @ m
    log_pi = -h + d * np.log(M)
    pi = np.exp(log_pi - log_pi.max())
    pi /= pi.sum()
    W = expJ * m[None, :]
    P = W / W.sum(axis=1, keepdims=True)
    return TreeChain(tuple(range(q)) if alphabet is None else alphabet, d, pi, P)


def solve_chain(d, J, h, **bp_kwargs):
    """``bp_solve`` followed by ``chain_from_bp``; returns ``(chain, bp)``."""
    bp = bp_solve(d, J, h, **bp_kwargs)
    return chain_from_bp(bp, d, J, h), bp


def joint_at_distance(chain, k):
    """Joint law of the symbols at two vertices at distance ``k``."""
    if k < 1:
        raise ValueError("distance must be at least 1")
    xi = chain.pi[:, None] * np.linalg.matrix_power(chain.P, k)
    xi = xi / xi.sum()
    return DistTable(("u", "v"), chain.alphabet, xi)


def decay_bound(d, k):
    """Exact bound on ``I(X_u, X_v) / H(X_v)`` at distance ``k``, with ``l = k // 2``."""
    l = k // 2
    if k % 2:
        return Fraction(2, d * (d - 1) ** l)
    return Fraction(1, (d - 1) ** l)


@dataclass(frozen=True)
class DecayRow:
    k: int
    mutual_info: float
    entropy: float
    ratio: float
    bound: Fraction
    passed: bool

    def as_csv(self):
        return (f"{self.k},{self.mutual_info!r},{self.entropy!r},{self.ratio!r},"
                f"{float(self.bound)!r},{str(self.passed).lower()}")


DECAY_HEADER = "k,mutual_info,entropy,ratio,bound,pass"


def decay_table(chain, k_max):
    """Mutual information decay along the chain against the distance bound."""
    H = entropy(chain.pi)
    rows = []
    for k in range(1, k_max + 1):
        I = mutual_information(joint_at_distance(chain, k))
        ratio = I / H if H > 0 else 0.0
        bound = decay_bound(chain.d, k)
        rows.append(DecayRow(k, I, H, ratio, bound, ratio <= float(bound)))
    return rows


def decay_csv(rows):
    return "\n".join([DECAY_HEADER] + [r.as_csv() for r in rows]) + "\n"


# --------------------------------------------------------------------------
# finite subtrees


def tree_ball_shape(d, r):
    """Parent array of the radius-``r`` ball of ``T_d``, root index 0, BFS order."""
    parent = [-1]
    depth = [0]
    i = 0
    while i < len(parent):
        if depth[i] < r:
            kids = d if i == 0 else d - 1
            for _ in range(kids):
                parent.append(i)
                depth.append(depth[i] + 1)
        i += 1
    return np.array(parent)


def edge_union_shape(d, r):
    """Parent array of the union of the ``r``-balls around two adjacent vertices.

    Index 0 is one endpoint ``x`` and index 1 the other endpoint ``y``.
    """
    parent = [-1, 0]
    depth_x = [0, 1]   # distance to x
    depth_y = [1, 0]   # distance to y
    i = 0
    while i < len(parent):
        # every node has d - 1 neighbors besides the one towards the other end
        for _ in range(d - 1):
            dx, dy = depth_x[i] + 1, depth_y[i] + 1
            if min(dx, dy) <= r:
                parent.append(i)
                depth_x.append(dx)
                depth_y.append(dy)
        i += 1
    return np.array(parent)


def validate_shape(parent, d):
    parent = np.asarray(parent)
    if len(parent) == 0 or parent[0] != -1:
        raise ValueError("shape must have root index 0 with parent -1")
    for i in range(1, len(parent)):
        if not 0 <= parent[i] < i:
            raise ValueError("parents must precede children")
    deg = np.bincount(parent[1:], minlength=len(parent)) + (np.arange(len(parent)) > 0)
    if np.any(deg > d):
        raise ValueError(f"shape is not a subtree of T_{d}")


def ball_measure(chain, parent, cap=ENUMERATION_CAP):
    """Exact law of the chain on a finite subtree given by a parent array."""
    parent = np.asarray(parent)
    validate_shape(parent, chain.d)
    s = len(parent)
    q = chain.q
    if q ** s > cap:
        raise CapExceeded(f"{q}^{s} states exceed the enumeration cap {cap}")
    T = chain.pi.reshape((q,) + (1,) * (s - 1)).copy()
    for child in range(1, s):
        shape = [1] * s
        shape[parent[child]] = q
        shape[child] = q
        T = T * chain.P.reshape(shape)
    T = T / T.sum()
    return DistTable(range(s), chain.alphabet, T)


def brute_force_root_marginal(d, depth, J, h, bp):
    """Root marginal of the depth-``depth`` ball of ``T_d`` by exhaustive enumeration.

    Independent check of a BP solution: each leaf stands in for ``d - 1``
    cut-off subtrees, whose incoming messages ``M(a) = sum_b exp(-J(a,b)) m(b)``
    enter as an extra field ``-(d - 1) log M``.
    """
    from .gibbs import Potential, brute_force_gibbs
    from .graph import build_graph

    J = np.asarray(J, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    parent = tree_ball_shape(d, depth)
    g = build_graph([(int(p), i) for i, p in enumerate(parent) if p >= 0])
    M = np.exp(-J) @ np.asarray(bp.message)
    is_leaf = np.ones(len(parent), bool)
    is_leaf[parent[1:]] = False
    fields = np.tile(h, (g.n, 1))
    fields[is_leaf] -= (d - 1) * np.log(M)
    pot = Potential(g, tuple(range(len(h))), fields, np.broadcast_to(J, (g.m,) + J.shape))
    return brute_force_gibbs(g, pot).marginal((0,)).probs
