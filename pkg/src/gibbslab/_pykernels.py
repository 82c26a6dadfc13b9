"""Pure-Python reference implementations of the hot kernels.

Every function here has a twin in ``_ckernels.pyx`` with the same signature
and the same floating-point operation order, so both backends produce
identical results for identical inputs.
"""
import math

import numpy as np

TV_SLACK = 1e-12


def fisher_yates(uniforms):
    """Return a permutation of ``range(len(uniforms))``.

    Classic descending Fisher-Yates: for ``i = n-1 .. 1`` swap position ``i``
    with ``j = floor(uniforms[i] * (i + 1))``.  ``uniforms[0]`` is unused.
    """
    u = np.asarray(uniforms, dtype=np.float64).tolist()
    n = len(u)
    perm = list(range(n))
    for i in range(n - 1, 0, -1):
        j = int(u[i] * (i + 1))
        if j > i:
            j = i
        perm[i], perm[j] = perm[j], perm[i]
    return np.asarray(perm, dtype=np.int64)


def glauber_sweep(state, indptr, indices, arc_tid, pair_tables, vertex_tid,
                  field_tables, sites, uniforms):
    """Heat-bath updates at ``sites`` (in order), modifying ``state`` in place.

    Arc ``k`` couples its source symbol ``a`` with target symbol ``b`` by
    ``pair_tables[arc_tid[k], a, b]``; vertex ``v`` has field
    ``field_tables[vertex_tid[v]]``.
    """
    q = field_tables.shape[1]
    st = state.tolist()
    ip = indptr.tolist()
    nb = indices.tolist()
    tl = pair_tables.tolist()
    Jl = [tl[t] for t in arc_tid.tolist()]
    fl = field_tables.tolist()
    hl = [fl[t] for t in vertex_tid.tolist()]
    energies = [0.0] * q
    weights = [0.0] * q
    for v, u in zip(sites.tolist(), uniforms.tolist()):
        hv = hl[v]
        for a in range(q):
            energies[a] = hv[a]
        for k in range(ip[v], ip[v + 1]):
            s = st[nb[k]]
            Jk = Jl[k]
            for a in range(q):
                energies[a] += Jk[a][s]
        emin = energies[0]
        for a in range(1, q):
            if energies[a] < emin:
                emin = energies[a]
        total = 0.0
        for a in range(q):
            weights[a] = math.exp(emin - energies[a])
            total += weights[a]
        target = u * total
        acc = 0.0
        pick = q - 1
        for a in range(q):
            acc += weights[a]
            if target < acc:
                pick = a
                break
        st[v] = pick
    state[:] = st


def ball_sizes(indptr, indices, radius):
    """Number of distinct vertices within graph distance ``radius`` of each vertex."""
    ip = indptr.tolist()
    nb = indices.tolist()
    n = len(ip) - 1
    stamp = [-1] * n
    out = [0] * n
    for root in range(n):
        stamp[root] = root
        frontier = [root]
        count = 1
        for _ in range(radius):
            nxt = []
            for x in frontier:
                for k in range(ip[x], ip[x + 1]):
                    y = nb[k]
                    if stamp[y] != root:
                        stamp[y] = root
                        nxt.append(y)
            count += len(nxt)
            if not nxt:
                break
            frontier = nxt
        out[root] = count
    return np.asarray(out, dtype=np.int64)


def count_good_colorings(n_vertices, q, edge_a, edge_b, edge_base, n_fold, target, eps):
    """Count ``q``-colorings whose per-base-edge empirical pair law is ``eps``-close in TV.

    ``edge_a[j], edge_b[j]`` is the j-th lifted edge and ``edge_base[j]`` its
    base edge; ``target`` has shape ``(n_base, q*q)``.  Enumerates all
    ``q**n_vertices`` colorings in chunks with vectorized numpy.
    """
    edge_a = np.asarray(edge_a, dtype=np.int64)
    edge_b = np.asarray(edge_b, dtype=np.int64)
    edge_base = np.asarray(edge_base, dtype=np.int64)
    target = np.asarray(target, dtype=np.float64)
    n_base = target.shape[0]
    qq = q * q
    total = q ** n_vertices
    powers = q ** np.arange(n_vertices, dtype=np.int64)
    chunk = 1 << 15
    # column offsets so one bincount handles every (base edge, pair type) slot
    slot_base = edge_base * qq
    count = 0
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        digits = (idx[:, None] // powers[None, :]) % q
        types = digits[:, edge_a] * q + digits[:, edge_b] + slot_base[None, :]
        rows = np.repeat(np.arange(len(idx), dtype=np.int64), len(edge_a))
        flat = rows * (n_base * qq) + types.ravel()
        counts = np.bincount(flat, minlength=len(idx) * n_base * qq)
        counts = counts.reshape(len(idx), n_base, qq).astype(np.float64)
        tv = 0.5 * np.abs(counts / n_fold - target[None, :, :]).sum(axis=2)
        ok = np.all(tv <= eps + TV_SLACK, axis=1)
        count += int(ok.sum())
    return count
