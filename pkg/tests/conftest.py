"""Shared builders for the test suite.

The random graph builder constructs FlowGraphs directly (not through the
transaction pipeline) so measure tests stay independent of netbuild.
"""

from __future__ import annotations

import numpy as np
import pytest

from cityflows.netbuild import FlowGraph


def make_graph(edges, internal=None, period=2020, extra_nodes=()):
    """FlowGraph from an edge list [(u, v, cents)] and internal volume map."""
    edge_weight = {}
    nodes = set(extra_nodes)
    for u, v, w in edges:
        edge_weight[(u, v)] = edge_weight.get((u, v), 0) + w
        nodes.add(u)
        nodes.add(v)
    internal = dict(internal or {})
    nodes.update(internal)
    return FlowGraph(
        period=period,
        nodes=tuple(sorted(nodes)),
        edge_weight=edge_weight,
        internal_volume=internal,
    )


def random_graph(rng: np.random.Generator, n_nodes: int, edge_prob: float = 0.4,
                 max_weight: int = 1000, internal_prob: float = 0.5) -> FlowGraph:
    names = [f"C{i:03d}" for i in range(n_nodes)]
    edges = []
    for i in range(n_nodes):
        for j in range(n_nodes):
            if i != j and rng.random() < edge_prob:
                edges.append((names[i], names[j], int(rng.integers(1, max_weight))))
    internal = {
        name: int(rng.integers(1, max_weight))
        for name in names
        if rng.random() < internal_prob
    }
    return make_graph(edges, internal, extra_nodes=names)


@pytest.fixture
def rng():
    return np.random.default_rng(202)
