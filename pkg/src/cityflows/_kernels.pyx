# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: PageRank power iteration and all-pairs BFS.

Same contracts as the pure fallback in `cityflows._kernels_py`; see the
docstrings there. Kept minimal on purpose: everything else in the
package is NumPy-bound and gains nothing from compilation.
"""

from libc.math cimport fabs

import numpy as np

cimport numpy as cnp

cnp.import_array()


def pagerank_power(const cnp.int64_t[::1] indptr,
                   const cnp.int64_t[::1] indices,
                   const double[::1] probs,
                   double damping,
                   double tol,
                   long max_iter):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    x_arr = np.full(n, 1.0 / n)
    acc_arr = np.zeros(n)
    cdef double[::1] x = x_arr
    cdef double[::1] acc = acc_arr
    cdef Py_ssize_t u, e, i
    cdef long iteration
    cdef double xu, dangling_mass, base, value, delta
    cdef double teleport = (1.0 - damping) / n

    for iteration in range(1, max_iter + 1):
        for i in range(n):
            acc[i] = 0.0
        dangling_mass = 0.0
        for u in range(n):
            if indptr[u] == indptr[u + 1]:
                dangling_mass += x[u]
                continue
            xu = x[u]
            for e in range(indptr[u], indptr[u + 1]):
                acc[indices[e]] += probs[e] * xu
        base = teleport + damping * dangling_mass / n
        delta = 0.0
        for i in range(n):
            value = base + damping * acc[i]
            delta += fabs(value - x[i])
            x[i] = value
        if delta < tol:
            return x_arr, iteration, True
    return x_arr, max_iter, False


def bfs_eccentricities(const cnp.int64_t[::1] indptr,
                       const cnp.int64_t[::1] indices):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    comp_arr = np.full(n, -1, dtype=np.int64)
    ecc_arr = np.zeros(n, dtype=np.int64)
    cdef cnp.int64_t[::1] component = comp_arr
    cdef cnp.int64_t[::1] ecc = ecc_arr
    queue_arr = np.empty(n, dtype=np.int64)
    dist_arr = np.empty(n, dtype=np.int64)
    mark_arr = np.full(n, -1, dtype=np.int64)
    cdef cnp.int64_t[::1] queue = queue_arr
    cdef cnp.int64_t[::1] dist = dist_arr
    cdef cnp.int64_t[::1] mark = mark_arr
    cdef Py_ssize_t start, head, tail, u, v, e
    cdef cnp.int64_t du, farthest

    for start in range(n):
        if component[start] != -1:
            continue
        component[start] = start
        head = 0
        tail = 0
        queue[tail] = start
        tail += 1
        while head < tail:
            u = queue[head]
            head += 1
            for e in range(indptr[u], indptr[u + 1]):
                v = indices[e]
                if component[v] == -1:
                    component[v] = start
                    queue[tail] = v
                    tail += 1

    for start in range(n):
        mark[start] = start
        dist[start] = 0
        head = 0
        tail = 0
        queue[tail] = start
        tail += 1
        farthest = 0
        while head < tail:
            u = queue[head]
            head += 1
            du = dist[u]
            if du > farthest:
                farthest = du
            for e in range(indptr[u], indptr[u + 1]):
                v = indices[e]
                if mark[v] != start:
                    mark[v] = start
                    dist[v] = du + 1
                    queue[tail] = v
                    tail += 1
        ecc[start] = farthest
    return comp_arr, ecc_arr
