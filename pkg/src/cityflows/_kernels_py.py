"""Pure-Python/NumPy fallback for the hot graph kernels.

Mirrors the compiled `cityflows._kernels` extension exactly; the backend
is chosen once at import time in `cityflows._backend`. Both backends are
single-threaded and deterministic.
"""

from __future__ import annotations

from collections import deque

import numpy as np


def pagerank_power(indptr, indices, probs, damping, tol, max_iter):
    """Weighted PageRank by power iteration over a CSR transition structure.

    `indptr`/`indices` describe edges grouped by source node; `probs[e]`
    is the transition probability of edge e (edge weight over the source
    node's out-strength). Rows with no entries are dangling nodes whose
    mass is redistributed uniformly. Iteration stops when the L1 change
    drops below `tol`.

    Returns (pi, iterations, converged) with pi a probability vector.
    """
    n = indptr.shape[0] - 1
    out_deg = np.diff(indptr)
    src = np.repeat(np.arange(n, dtype=np.int64), out_deg)
    dangling = out_deg == 0
    x = np.full(n, 1.0 / n)
    teleport = (1.0 - damping) / n
    for iteration in range(1, max_iter + 1):
        flow = np.bincount(indices, weights=x[src] * probs, minlength=n)
        dangling_mass = float(x[dangling].sum())
        new = teleport + damping * (flow + dangling_mass / n)
        delta = float(np.abs(new - x).sum())
        x = new
        if delta < tol:
            return x, iteration, True
    return x, max_iter, False


def bfs_eccentricities(indptr, indices):
    """Component labels and BFS eccentricities on an undirected CSR graph.

    Returns (component, ecc) int64 arrays; a component's label is the
    smallest node index it contains.
    """
    n = indptr.shape[0] - 1
    component = np.full(n, -1, dtype=np.int64)
    ecc = np.zeros(n, dtype=np.int64)
    for start in range(n):
        if component[start] != -1:
            continue
        component[start] = start
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for e in range(indptr[u], indptr[u + 1]):
                v = indices[e]
                if component[v] == -1:
                    component[v] = start
                    queue.append(v)
    dist = np.empty(n, dtype=np.int64)
    mark = np.full(n, -1, dtype=np.int64)
    for start in range(n):
        mark[start] = start
        dist[start] = 0
        queue = deque([start])
        farthest = 0
        while queue:
            u = queue.popleft()
            du = dist[u]
            if du > farthest:
                farthest = du
            for e in range(indptr[u], indptr[u + 1]):
                v = indices[e]
                if mark[v] != start:
                    mark[v] = start
                    dist[v] = du + 1
                    queue.append(v)
        ecc[start] = farthest
    return component, ecc
