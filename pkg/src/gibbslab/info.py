"""Entropy, mutual information, total variation and covariance of exact tables.

All logarithms are natural.
"""
from __future__ import annotations

import numpy as np

from .rng import make_rng, uniforms
from .tables import DistTable, DomainMismatch, as_probs


class PerturbationInfeasible(ValueError):
    pass


class Observable:
    """Real-valued function on a finite alphabet, given by its value table."""

    def __init__(self, values):
        self.values = np.asarray(values, dtype=np.float64)
        if not np.all(np.isfinite(self.values)):
            raise ValueError("observable values must be finite")

    def __call__(self, a):
        return self.values[a]

    @property
    def sup(self):
        return float(np.abs(self.values).max())


def entropy(p):
    """Shannon entropy with ``0 log 0 = 0``."""
    x = as_probs(p).ravel()
    x = x[x > 0]
    return float(max(0.0, -np.sum(x * np.log(x))))


def entropy_miller_madow(counts):
    """Plug-in entropy of integer counts plus the first-order bias term ``(K - 1) / 2n``.

    ``K`` is the number of occupied cells and ``n`` the total count.  The
    plug-in estimate alone underestimates entropy by about that amount.
    """
    c = np.asarray(counts, dtype=np.float64).ravel()
    n = c.sum()
    if n <= 0:
        raise ValueError("need a positive total count")
    k = int(np.count_nonzero(c))
    return entropy(c / n) + (k - 1) / (2 * n)


def _joint_array(joint):
    x = as_probs(joint)
    if x.ndim != 2:
        raise DomainMismatch("joint table needs exactly two components")
    return x


def mutual_information(joint):
    """``H(X) + H(Y) - H(X, Y)`` for a two-component table."""
    x = _joint_array(joint)
    prod = np.outer(x.sum(axis=1), x.sum(axis=0))
    # sum of p * phi(x/p - 1), phi(t) = (1+t) log(1+t) - t >= 0: every term is
    # nonnegative, so nearly independent pairs lose no digits to cancellation
    mask = prod > 0
    p = prod[mask]
    t = (x[mask] - p) / p
    with np.errstate(divide="ignore", invalid="ignore"):
        phi = np.where(t > -1, (1 + t) * np.log1p(t) - t, 1.0)
    return float(max(0.0, np.sum(p * phi)))


def product_of_marginals(joint):
    x = _joint_array(joint)
    return np.outer(x.sum(axis=1), x.sum(axis=0))


def tv_distance(p, q):
    a, b = as_probs(p), as_probs(q)
    if a.shape != b.shape:
        raise DomainMismatch(f"shapes {a.shape} and {b.shape} differ")
    if isinstance(p, DistTable) and isinstance(q, DistTable) and p.alphabet != q.alphabet:
        raise DomainMismatch("alphabets differ")
    return float(0.5 * np.abs(a - b).sum())


def covariance(joint, f, g):
    """``E f(X) g(Y) - E f(X) E g(Y)`` computed exactly from the table."""
    x = _joint_array(joint)
    fv = f.values if isinstance(f, Observable) else np.asarray(f, dtype=np.float64)
    gv = g.values if isinstance(g, Observable) else np.asarray(g, dtype=np.float64)
    if fv.shape != (x.shape[0],) or gv.shape != (x.shape[1],):
        raise DomainMismatch("observables do not cover the component alphabets")
    exy = fv @ x @ gv
    return float(exy - (fv @ x.sum(axis=1)) * (x.sum(axis=0) @ gv))


def pinsker_report(joint, f=None, g=None):
    """TV to the product of marginals, its Pinsker bound, and the covariance chain.

    Returns a dict with ``tv``, ``pinsker = sqrt(I / 2)`` and, when
    observables are given, ``cov`` and ``cov_bound = 4 sup|f| sup|g| tv``.
    """
    I = mutual_information(joint)
    out = {"mi": I, "tv": tv_distance(joint, product_of_marginals(joint)),
           "pinsker": float(np.sqrt(I / 2))}
    if f is not None and g is not None:
        f = f if isinstance(f, Observable) else Observable(f)
        g = g if isinstance(g, Observable) else Observable(g)
        out["cov"] = covariance(joint, f, g)
        out["cov_bound"] = 4 * f.sup * g.sup * out["tv"]
    return out


def consistent_direction(rng, q):
    """Random ``q x q`` matrix with zero row and column sums, unit TV size."""
    D = uniforms(rng, q * q).reshape(q, q) - 0.5
    D = D - D.mean(axis=0, keepdims=True) - D.mean(axis=1, keepdims=True) + D.mean()
    size = 0.5 * np.abs(D).sum()
    if size == 0:
        return consistent_direction(rng, q)
    return D / size


def quadratic_info_ratios(eta, n_perturbations, magnitude, seed):
    """``I(xi) / ||xi - eta x eta||^2`` for random ``xi`` with both marginals ``eta``.

    Each ``xi = eta x eta + magnitude * D`` with ``D`` a random
    marginal-preserving direction normalized to TV size 1, so the TV distance
    to the product is exactly ``magnitude``.
    """
    e = as_probs(eta).ravel()
    if np.any(e <= 0):
        raise PerturbationInfeasible("eta must be strictly positive")
    if magnitude <= 0:
        raise PerturbationInfeasible("magnitude must be positive")
    base = np.outer(e, e)
    rng = make_rng(seed)
    out = np.empty(n_perturbations)
    for i in range(n_perturbations):
        xi = base + magnitude * consistent_direction(rng, len(e))
        if np.any(xi < 0):
            raise PerturbationInfeasible(
                f"magnitude {magnitude} leaves the consistent-marginal polytope")
        tv = 0.5 * np.abs(xi - base).sum()
        out[i] = mutual_information(xi) / tv ** 2
    return out


def quadratic_info_bound_check(eta, n_perturbations, magnitude, seed):
    """Worst ratio ``I / TV^2`` over sampled consistent perturbations of ``eta x eta``."""
    return float(quadratic_info_ratios(eta, n_perturbations, magnitude, seed).min())
