"""Benchmark the compiled graph kernels against the pure-Python fallback.

Builds a hub-heavy random digraph (sizes roughly matching a national
city network) and times weighted PageRank power iteration and all-pairs
BFS eccentricities on both backends.

Run:  python benchmarks/bench_kernels.py [--nodes 2000] [--repeat 3]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from cityflows import _kernels_py

try:
    from cityflows import _kernels as _kernels_c
except ImportError:
    _kernels_c = None


def build_graph(rng: np.random.Generator, n: int, mean_out: float):
    """CSR digraph whose targets are drawn from a heavy-tailed weight."""
    attractiveness = rng.pareto(1.3, n) + 1.0
    p = attractiveness / attractiveness.sum()
    out_deg = rng.poisson(mean_out, n)
    src = np.repeat(np.arange(n), out_deg)
    dst = rng.choice(n, size=len(src), p=p)
    keep = src != dst
    src, dst = src[keep], dst[keep]
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    weights = rng.uniform(1.0, 1000.0, len(src))
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, src + 1, 1)
    np.cumsum(indptr, out=indptr)
    out_strength = np.bincount(src, weights=weights, minlength=n)
    probs = weights / out_strength[src]
    # Symmetric projection for the BFS kernel.
    pairs = np.unique(
        np.column_stack(
            [np.minimum(src, dst), np.maximum(src, dst)]
        ),
        axis=0,
    )
    und_src = np.concatenate([pairs[:, 0], pairs[:, 1]])
    und_dst = np.concatenate([pairs[:, 1], pairs[:, 0]])
    order = np.lexsort((und_dst, und_src))
    und_src, und_dst = und_src[order], und_dst[order]
    und_indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(und_indptr, und_src + 1, 1)
    np.cumsum(und_indptr, out=und_indptr)
    return (indptr, dst.astype(np.int64), probs,
            und_indptr, und_dst.astype(np.int64))


def timed(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--nodes", type=int, default=2000)
    parser.add_argument("--mean-out", type=float, default=25.0)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--seed", type=int, default=1)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    indptr, indices, probs, und_indptr, und_indices = build_graph(
        rng, args.nodes, args.mean_out
    )
    print(f"graph: {args.nodes} nodes, {len(indices)} edges")

    jobs = {
        "pagerank (tol=1e-12)": lambda k: k.pagerank_power(
            indptr, indices, probs, 0.85, 1e-12, 1000
        ),
        "all-pairs BFS": lambda k: k.bfs_eccentricities(und_indptr, und_indices),
    }
    backends = [("pure", _kernels_py)]
    if _kernels_c is not None:
        backends.insert(0, ("compiled", _kernels_c))
    else:
        print("compiled extension not available; timing pure backend only")

    results: dict[str, dict[str, float]] = {}
    for name, module in backends:
        results[name] = {}
        for job, fn in jobs.items():
            results[name][job] = timed(lambda: fn(module), args.repeat)

    if _kernels_c is not None:
        pi_c, _, _ = jobs["pagerank (tol=1e-12)"](_kernels_c)
        pi_p, _, _ = jobs["pagerank (tol=1e-12)"](_kernels_py)
        assert np.abs(pi_c - pi_p).max() < 1e-12, "backend results diverged"

    width = max(len(j) for j in jobs)
    header = f"{'kernel':<{width}}  " + "".join(f"{n:>12}" for n, _ in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for job in jobs:
        line = f"{job:<{width}}  " + "".join(
            f"{results[n][job]:>11.4f}s" for n, _ in backends
        )
        if len(backends) == 2:
            line += f"{results['pure'][job] / results['compiled'][job]:>9.1f}x"
        print(line)


if __name__ == "__main__":
    main()
