# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled twins of the kernels in ``_pykernels``.

Signatures and floating-point operation order match the pure-Python versions
exactly; see that module for the contracts.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, fabs
from libc.stdlib cimport malloc, free

cnp.import_array()

cdef enum:
    MAX_Q = 64

TV_SLACK = 1e-12


def fisher_yates(const double[::1] uniforms):
    cdef Py_ssize_t n = uniforms.shape[0]
    perm_arr = np.arange(n, dtype=np.int64)
    cdef long long[::1] perm = perm_arr
    cdef Py_ssize_t i, j
    cdef long long tmp
    for i in range(n - 1, 0, -1):
        j = <Py_ssize_t>(uniforms[i] * (i + 1))
        if j > i:
            j = i
        tmp = perm[i]
        perm[i] = perm[j]
        perm[j] = tmp
    return perm_arr


def glauber_sweep(long long[::1] state, const long long[::1] indptr,
                  const long long[::1] indices, const int[::1] arc_tid,
                  const double[:, :, ::1] pair_tables, const int[::1] vertex_tid,
                  const double[:, ::1] field_tables, const long long[::1] sites,
                  const double[::1] uniforms):
    cdef Py_ssize_t q = field_tables.shape[1]
    if q > MAX_Q:
        raise ValueError("alphabet too large for compiled kernel")
    cdef double energies[MAX_Q]
    cdef double weights[MAX_Q]
    cdef Py_ssize_t t, k, a, v, pick, tid
    cdef long long s
    cdef double emin, total, target, acc
    with nogil:
        for t in range(sites.shape[0]):
            v = sites[t]
            for a in range(q):
                energies[a] = field_tables[vertex_tid[v], a]
            for k in range(indptr[v], indptr[v + 1]):
                s = state[indices[k]]
                tid = arc_tid[k]
                for a in range(q):
                    energies[a] += pair_tables[tid, a, s]
            emin = energies[0]
            for a in range(1, q):
                if energies[a] < emin:
                    emin = energies[a]
            total = 0.0
            for a in range(q):
                weights[a] = exp(emin - energies[a])
                total += weights[a]
            target = uniforms[t] * total
            acc = 0.0
            pick = q - 1
            for a in range(q):
                acc += weights[a]
                if target < acc:
                    pick = a
                    break
            state[v] = pick


def ball_sizes(const long long[::1] indptr, const long long[::1] indices, long long radius):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    out_arr = np.zeros(n, dtype=np.int64)
    cdef long long[::1] out = out_arr
    stamp_arr = np.full(n, -1, dtype=np.int64)
    cdef long long[::1] stamp = stamp_arr
    queue_arr = np.empty(max(n, 1), dtype=np.int64)
    cdef long long[::1] queue = queue_arr
    cdef Py_ssize_t root, head, tail, level_end, k, x, y
    cdef long long depth
    with nogil:
        for root in range(n):
            stamp[root] = root
            queue[0] = root
            head = 0
            tail = 1
            depth = 0
            while depth < radius and head < tail:
                level_end = tail
                while head < level_end:
                    x = queue[head]
                    head += 1
                    for k in range(indptr[x], indptr[x + 1]):
                        y = indices[k]
                        if stamp[y] != root:
                            stamp[y] = root
                            queue[tail] = y
                            tail += 1
                depth += 1
            out[root] = tail
    return out_arr


def count_good_colorings(long long n_vertices, long long q, edge_a, edge_b, edge_base,
                         long long n_fold, target, double eps):
    cdef long long[::1] ea = np.ascontiguousarray(edge_a, dtype=np.int64)
    cdef long long[::1] eb = np.ascontiguousarray(edge_b, dtype=np.int64)
    cdef long long[::1] ebase = np.ascontiguousarray(edge_base, dtype=np.int64)
    cdef double[:, ::1] tgt = np.ascontiguousarray(target, dtype=np.float64)
    cdef Py_ssize_t n_base = tgt.shape[0]
    cdef Py_ssize_t qq = q * q
    cdef Py_ssize_t m = ea.shape[0]
    cdef Py_ssize_t j, x, e, t, p

    # vertex -> incident lifted edges, with the role of the vertex in each
    deg_arr = np.zeros(n_vertices + 1, dtype=np.int64)
    for j in range(m):
        deg_arr[ea[j] + 1] += 1
        deg_arr[eb[j] + 1] += 1
    inc_ptr_arr = np.cumsum(deg_arr)
    cdef long long[::1] inc_ptr = inc_ptr_arr
    inc_edge_arr = np.empty(2 * m, dtype=np.int64)
    inc_first_arr = np.empty(2 * m, dtype=np.int64)
    cdef long long[::1] inc_edge = inc_edge_arr
    cdef long long[::1] inc_first = inc_first_arr
    fill_arr = inc_ptr_arr[:-1].copy()
    cdef long long[::1] fill = fill_arr
    for j in range(m):
        inc_edge[fill[ea[j]]] = j
        inc_first[fill[ea[j]]] = 1
        fill[ea[j]] += 1
        inc_edge[fill[eb[j]]] = j
        inc_first[fill[eb[j]]] = 0
        fill[eb[j]] += 1

    digits_arr = np.zeros(max(n_vertices, 1), dtype=np.int64)
    cdef long long[::1] digits = digits_arr
    counts_arr = np.zeros((n_base, qq), dtype=np.int64)
    cdef long long[:, ::1] counts = counts_arr
    for j in range(m):
        counts[ebase[j], 0] += 1

    cdef double n_fold_d = <double>n_fold
    cdef double bound = eps + TV_SLACK
    cdef double s
    cdef long long good = 0
    cdef long long old, new, other, told, tnew
    cdef bint ok, done
    with nogil:
        while True:
            ok = True
            for e in range(n_base):
                s = 0.0
                for t in range(qq):
                    s += fabs(counts[e, t] / n_fold_d - tgt[e, t])
                if 0.5 * s > bound:
                    ok = False
                    break
            if ok:
                good += 1
            # odometer increment, updating incident pair counts
            done = True
            x = 0
            while x < n_vertices:
                old = digits[x]
                new = old + 1
                if new == q:
                    new = 0
                for p in range(inc_ptr[x], inc_ptr[x + 1]):
                    j = inc_edge[p]
                    if inc_first[p]:
                        other = digits[eb[j]]
                        told = old * q + other
                        tnew = new * q + other
                    else:
                        other = digits[ea[j]]
                        told = other * q + old
                        tnew = other * q + new
                    counts[ebase[j], told] -= 1
                    counts[ebase[j], tnew] += 1
                digits[x] = new
                if new != 0:
                    done = False
                    break
                x += 1
            if done:
                break
    return int(good)
