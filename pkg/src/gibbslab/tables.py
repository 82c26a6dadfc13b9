"""Exact probability tables over colorings of a finite vertex set."""
from __future__ import annotations

import numpy as np

SUM_TOL = 1e-12


class DomainMismatch(ValueError):
    pass


class DistTable:
    """Probability table over ``alphabet ** len(domain)``.

    ``probs`` has one axis per domain element, in domain order, each of length
    ``len(alphabet)``.
    """

    def __init__(self, domain, alphabet, probs, *, check=True):
        self.domain = tuple(domain)
        self.alphabet = tuple(alphabet)
        probs = np.asarray(probs, dtype=np.float64)
        q = len(self.alphabet)
        if probs.shape != (q,) * len(self.domain):
            raise ValueError(f"table shape {probs.shape} does not match domain/alphabet")
        if check:
            if np.any(probs < 0) or not np.all(np.isfinite(probs)):
                raise ValueError("probabilities must be finite and nonnegative")
            if abs(probs.sum() - 1.0) > SUM_TOL:
                raise ValueError(f"probabilities sum to {probs.sum()!r}")
        self.probs = probs
        self.probs.flags.writeable = False

    @classmethod
    def from_weights(cls, domain, alphabet, weights):
        w = np.asarray(weights, dtype=np.float64)
        return cls(domain, alphabet, w / w.sum())

    @classmethod
    def from_log_weights(cls, domain, alphabet, logw):
        logw = np.asarray(logw, dtype=np.float64)
        w = np.exp(logw - logw.max())
        return cls(domain, alphabet, w / w.sum())

    @classmethod
    def uniform(cls, domain, alphabet):
        q = len(tuple(alphabet))
        k = len(tuple(domain))
        return cls(domain, alphabet, np.full((q,) * k, float(q) ** -k))

    @classmethod
    def from_samples(cls, domain, alphabet, samples):
        """Empirical table of integer-coded samples, shape ``(n_samples, len(domain))``."""
        samples = np.asarray(samples, dtype=np.int64).reshape(-1, len(tuple(domain)))
        q = len(tuple(alphabet))
        flat = np.ravel_multi_index(samples.T, (q,) * samples.shape[1])
        counts = np.bincount(flat, minlength=q ** samples.shape[1])
        return cls(domain, alphabet, (counts / len(samples)).reshape((q,) * samples.shape[1]))

    @property
    def q(self):
        return len(self.alphabet)

    def prob(self, config):
        return float(self.probs[tuple(config)])

    def marginal(self, keep):
        """Table of the sub-domain ``keep`` (in the given order)."""
        keep = tuple(keep)
        axes = [self.domain.index(v) for v in keep]
        drop = tuple(i for i in range(len(self.domain)) if i not in axes)
        p = self.probs.sum(axis=drop) if drop else self.probs
        remaining = [i for i in range(len(self.domain)) if i in axes]
        p = np.transpose(p, [remaining.index(a) for a in axes])
        return DistTable(keep, self.alphabet, p, check=False)

    def transpose(self, order=None):
        if order is None:
            order = tuple(reversed(self.domain))
        axes = [self.domain.index(v) for v in order]
        return DistTable(order, self.alphabet, np.transpose(self.probs, axes), check=False)

    def relabel(self, domain):
        return DistTable(domain, self.alphabet, self.probs, check=False)

    def product(self, other):
        """Independent product on the concatenated domain."""
        if self.alphabet != other.alphabet:
            raise DomainMismatch("alphabets differ")
        p = np.multiply.outer(self.probs, other.probs)
        return DistTable(self.domain + other.domain, self.alphabet, p, check=False)

    def conditional(self, given, values):
        """Conditional table of the remaining coordinates given ``given = values``.

        Returns ``None`` when the conditioning event has probability zero.
        """
        given = tuple(given)
        idx = [slice(None)] * len(self.domain)
        for v, a in zip(given, values):
            idx[self.domain.index(v)] = a
        sub = self.probs[tuple(idx)]
        total = sub.sum()
        if total <= 0:
            return None
        rest = tuple(v for v in self.domain if v not in given)
        return DistTable(rest, self.alphabet, sub / total, check=False)

    def __repr__(self):
        return f"DistTable(domain={self.domain}, alphabet={self.alphabet})"


def as_probs(p):
    """Raw probability array of a :class:`DistTable` or array-like."""
    return np.asarray(p.probs if isinstance(p, DistTable) else p, dtype=np.float64)
