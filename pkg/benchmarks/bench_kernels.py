"""Compare the compiled and pure-Python kernels on identical inputs.

Usage: python benchmarks/bench_kernels.py [--repeat 3]
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from gibbslab import kernels
from gibbslab.gibbs import GlauberSampler, ising
from gibbslab.graph import load_graph, random_covering


def _time(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def cases():
    cov = random_covering(load_graph("petersen"), 500, 0)
    g = cov.graph
    s = GlauberSampler(g, ising(g, 0.4), 0)
    rng = np.random.default_rng(0)
    k = 20 * g.n
    sites = rng.integers(0, g.n, k)
    us = rng.random(k)

    def glauber(mod):
        st = s.state.copy()
        mod.glauber_sweep(st, s._indptr, s._indices, s._arc_tid, s._pair_tables,
                          s._vertex_tid, s._field_tables, sites, us)
        return st

    k2 = random_covering(load_graph("K2"), 9, 0)
    target = np.full((1, 4), 0.25)
    perm_u = rng.random(200_000)
    yield f"glauber_sweep ({k} updates)", glauber
    yield "ball_sizes (R=3, 5000 vertices)", lambda m: m.ball_sizes(g.indptr, g.indices, 3)
    yield "count_good_colorings (K2, N=9)", lambda m: m.count_good_colorings(
        18, 2, k2.lift_a, k2.lift_b, k2.lift_base, 9, target, 0.15)
    yield "fisher_yates (n=200000)", lambda m: m.fisher_yates(perm_u)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    names = kernels.available_backends()
    print(f"{'kernel':40s}" + "".join(f"{n:>12s}" for n in names) + "     speedup  same")
    for label, fn in cases():
        times, outs = [], []
        for n in names:
            t, out = _time(lambda: fn(kernels.get_backend(n)), args.repeat)
            times.append(t)
            outs.append(out)
        same = all(np.array_equal(np.asarray(o), np.asarray(outs[0])) for o in outs)
        speed = f"{times[0] / times[-1]:10.1f}x" if len(times) > 1 else ""
        print(f"{label:40s}" + "".join(f"{t:11.4f}s" for t in times) + f"  {speed}  {same}")


if __name__ == "__main__":
    main()
