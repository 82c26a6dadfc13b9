"""Seeded random streams.

All randomness is drawn from the raw 64-bit output of numpy's PCG64 bit
generator and converted to doubles as ``(x >> 11) * 2**-53``.  Only the raw
stream is used, so results do not depend on numpy's distribution methods.
"""
import numpy as np

_SCALE = 1.0 / 9007199254740992.0  # 2**-53


def _flatten(parts):
    for p in parts:
        if isinstance(p, (tuple, list)):
            yield from _flatten(p)
        else:
            yield int(p)


def make_rng(seed, *stream):
    """PCG64 generator for ``seed`` and optional sub-stream keys.

    ``seed`` may itself be a tuple of nonnegative integers; nested keys are
    flattened, so ``make_rng((s, 1), 2)`` equals ``make_rng(s, 1, 2)``.
    """
    key = list(_flatten((seed,) + stream))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(key)))


def uniforms(rng, size):
    raw = rng.bit_generator.random_raw(int(size))
    return (np.asarray(raw, dtype=np.uint64) >> np.uint64(11)).astype(np.float64) * _SCALE


def integers_below(rng, bound, size):
    """``size`` integers uniform on ``range(bound)`` via ``floor(u * bound)``."""
    out = (uniforms(rng, size) * bound).astype(np.int64)
    np.minimum(out, bound - 1, out=out)
    return out
