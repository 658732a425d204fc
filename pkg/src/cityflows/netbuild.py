"""Aggregate transactions into per-year directed weighted city graphs.

The stored orientation follows the money: an edge u -> v means firms in
city u paid firms in city v, i.e. u is the customer city and v the
supplier city. Intra-city volume is kept separately because the external
dependence measures need it as a denominator.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

from .errors import DataError
from .ingest import FirmDirectory, TransactionRecord, YearRange

MONEY_FLOW = "money_flow"
REVERSED = "reversed"


@dataclass(frozen=True)
class FlowGraph:
    """Directed weighted city graph for one year. Immutable by convention."""

    period: int
    nodes: tuple[str, ...]  # sorted city ids
    edge_weight: dict[tuple[str, str], int]  # (u, v) -> cents, u != v
    internal_volume: dict[str, int]  # city -> intra-city cents
    orientation: str = MONEY_FLOW

    def __post_init__(self) -> None:
        if self.orientation not in (MONEY_FLOW, REVERSED):
            raise DataError(f"bad orientation {self.orientation!r}")

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return len(self.edge_weight)

    def total_weight(self) -> int:
        """Edge plus internal cents; invariant under reverse()."""
        return sum(self.edge_weight.values()) + sum(self.internal_volume.values())


def build_flow_graphs(
    txs: list[TransactionRecord], firms: FirmDirectory, periods: YearRange
) -> list[FlowGraph]:
    """Build one FlowGraph per year in `periods` (empty years included).

    Weights are exact integer sums, so any permutation of the input
    transactions yields the identical graph.
    """
    edges: dict[int, dict[tuple[str, str], int]] = {y: {} for y in periods}
    internal: dict[int, dict[str, int]] = {y: {} for y in periods}
    nodes: dict[int, set[str]] = {y: set() for y in periods}
    city_cache: dict[str, str] = {}

    for tx in txs:
        year = tx.date.year
        if year not in periods:
            continue
        u = city_cache.get(tx.payer_firm)
        if u is None:
            u = firms.city_of(tx.payer_firm)
            city_cache[tx.payer_firm] = u
        v = city_cache.get(tx.payee_firm)
        if v is None:
            v = firms.city_of(tx.payee_firm)
            city_cache[tx.payee_firm] = v
        nodes[year].add(u)
        nodes[year].add(v)
        if u == v:
            vol = internal[year]
            vol[u] = vol.get(u, 0) + tx.amount
        else:
            ew = edges[year]
            key = (u, v)
            ew[key] = ew.get(key, 0) + tx.amount

    return [
        FlowGraph(
            period=year,
            nodes=tuple(sorted(nodes[year])),
            edge_weight=edges[year],
            internal_volume=internal[year],
        )
        for year in periods
    ]


def reverse(g: FlowGraph) -> FlowGraph:
    """Flip every edge (goods-flow view); an involution on FlowGraphs."""
    return FlowGraph(
        period=g.period,
        nodes=g.nodes,
        edge_weight={(v, u): w for (u, v), w in g.edge_weight.items()},
        internal_volume=dict(g.internal_volume),
        orientation=REVERSED if g.orientation == MONEY_FLOW else MONEY_FLOW,
    )


def dump_flow_graph(g: FlowGraph, out_dir: str | Path) -> None:
    """Write flowgraph_<year>.csv and internal_<year>.csv (sorted rows)."""
    out_dir = Path(out_dir)
    with (out_dir / f"flowgraph_{g.period}.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["payer_city", "payee_city", "weight_cents"])
        for (u, v), w in sorted(g.edge_weight.items()):
            writer.writerow([u, v, w])
    with (out_dir / f"internal_{g.period}.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["city", "weight_cents"])
        for city, w in sorted(g.internal_volume.items()):
            writer.writerow([city, w])
