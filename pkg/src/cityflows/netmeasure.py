"""Network measures on city flow graphs.

Covers the global measures (density, assortativity, diameter), the
per-city measures (degrees, strengths, PageRank in both orientations,
dependence on external customers/suppliers) and the small table utilities
(max-normalization, two-year smoothing, regional GDP terciles, rankings).

Degree/strength conventions are fixed by the money-flow orientation: a
city's in-neighbors are its customer cities, so in_degree counts
customers and total_received is the in-strength. Intra-city volume never
enters degrees or strengths; it only appears in the DOEC/DOES
denominators.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from . import _backend
from .errors import DataError, NumericalError
from .ingest import CityDirectory, CovariatePanel
from .netbuild import FlowGraph, reverse

ASSORTATIVITY_MODES = ("out-in", "out-out", "in-in", "in-out")

SIZE_SMALL = "small"
SIZE_MEDIUM = "medium"
SIZE_LARGE = "large"


class DegreeStrength(NamedTuple):
    in_degree: int
    out_degree: int
    total_received: int  # cents
    total_paid: int  # cents


class Dependence(NamedTuple):
    doec: float | None
    does: float | None


@dataclass(frozen=True, slots=True)
class PageRankResult:
    values: dict[str, float]
    iterations: int
    converged: bool
    damping: float


@dataclass(frozen=True, slots=True)
class GlobalMeasures:
    """Whole-graph measures for one period; None encodes undefined."""

    period: int
    density: float | None
    assortativity: float | None
    diameter: int | None


@dataclass(frozen=True, slots=True)
class MeasureRow:
    city: str
    period: int
    in_degree: int
    out_degree: int
    total_received: int
    total_paid: int
    pagerank_down: float
    pagerank_up: float
    doec: float | None
    does: float | None


@dataclass
class MeasureTable:
    """Per-city, per-period measures plus PageRank convergence flags."""

    rows: dict[tuple[str, int], MeasureRow] = field(default_factory=dict)
    convergence: dict[int, tuple[bool, bool]] = field(default_factory=dict)

    def periods(self) -> list[int]:
        return sorted({period for _, period in self.rows})

    def per_city(self, period: int, column: str) -> dict[str, float]:
        """One measure column as a city -> value map, skipping absent cells."""
        out: dict[str, float] = {}
        for (city, p), row in self.rows.items():
            if p != period:
                continue
            value = getattr(row, column)
            if value is not None:
                out[city] = value
        return out


def _node_index(g: FlowGraph) -> dict[str, int]:
    return {city: i for i, city in enumerate(g.nodes)}


def _edge_list(g: FlowGraph) -> list[tuple[str, str, int]]:
    """Edges sorted by (source, target) for deterministic array order."""
    return [(u, v, w) for (u, v), w in sorted(g.edge_weight.items())]


def density(g: FlowGraph) -> float:
    """Directed density E / (N * (N - 1)), intra-city volume excluded."""
    n = g.n_nodes
    if n < 2:
        raise NumericalError(f"density undefined for {n} node(s)")
    return g.n_edges / (n * (n - 1))


def degrees_strengths(g: FlowGraph) -> dict[str, DegreeStrength]:
    """Per-city (in_degree, out_degree, total_received, total_paid)."""
    in_deg = {city: 0 for city in g.nodes}
    out_deg = {city: 0 for city in g.nodes}
    received = {city: 0 for city in g.nodes}
    paid = {city: 0 for city in g.nodes}
    for (u, v), w in g.edge_weight.items():
        out_deg[u] += 1
        in_deg[v] += 1
        paid[u] += w
        received[v] += w
    return {
        city: DegreeStrength(in_deg[city], out_deg[city], received[city], paid[city])
        for city in g.nodes
    }


def assortativity(g: FlowGraph, mode: str = "out-in") -> float:
    """Pearson degree correlation over directed edges.

    For mode "a-b", correlates the a-degree of each edge's source with the
    b-degree of its target. The default "out-in" is the directed analogue
    of the classic coefficient. Unweighted: every edge counts once.
    """
    if mode not in ASSORTATIVITY_MODES:
        raise DataError(f"mode {mode!r} not one of {ASSORTATIVITY_MODES}")
    if g.n_edges < 2:
        raise NumericalError("assortativity needs at least 2 edges")
    ds = degrees_strengths(g)
    src_kind, dst_kind = mode.split("-")
    pick = {"out": lambda d: d.out_degree, "in": lambda d: d.in_degree}
    xs = np.empty(g.n_edges)
    ys = np.empty(g.n_edges)
    for i, (u, v, _) in enumerate(_edge_list(g)):
        xs[i] = pick[src_kind](ds[u])
        ys[i] = pick[dst_kind](ds[v])
    xs -= xs.mean()
    ys -= ys.mean()
    sx = float(np.sqrt((xs * xs).sum()))
    sy = float(np.sqrt((ys * ys).sum()))
    if sx == 0.0 or sy == 0.0:
        raise NumericalError(f"assortativity undefined: zero {mode} degree variance")
    return float((xs * ys).sum() / (sx * sy))


def _undirected_csr(g: FlowGraph) -> tuple[np.ndarray, np.ndarray]:
    index = _node_index(g)
    pairs = {
        (index[u], index[v]) if index[u] < index[v] else (index[v], index[u])
        for u, v in g.edge_weight
    }
    n = g.n_nodes
    degree = np.zeros(n, dtype=np.int64)
    for a, b in pairs:
        degree[a] += 1
        degree[b] += 1
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(degree, out=indptr[1:])
    indices = np.empty(len(pairs) * 2, dtype=np.int64)
    cursor = indptr[:-1].copy()
    for a, b in sorted(pairs):
        indices[cursor[a]] = b
        cursor[a] += 1
        indices[cursor[b]] = a
        cursor[b] += 1
    return indptr, indices


def diameter(g: FlowGraph) -> int:
    """Hop diameter of the largest component of the undirected projection.

    Exact all-pairs BFS; edge weights are ignored. Among equally large
    components the one containing the smallest city id wins, which keeps
    the result deterministic.
    """
    if g.n_nodes == 0:
        raise NumericalError("diameter undefined on an empty graph")
    indptr, indices = _undirected_csr(g)
    component, ecc = _backend.bfs_eccentricities(indptr, indices)
    labels, sizes = np.unique(component, return_counts=True)
    best = labels[sizes == sizes.max()].min()
    return int(ecc[component == best].max())


def _transition_csr(
    g: FlowGraph, weighted: bool
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    index = _node_index(g)
    n = g.n_nodes
    edges = _edge_list(g)
    src = np.fromiter((index[u] for u, _, _ in edges), dtype=np.int64, count=len(edges))
    dst = np.fromiter((index[v] for _, v, _ in edges), dtype=np.int64, count=len(edges))
    w = (
        np.fromiter((e[2] for e in edges), dtype=np.float64, count=len(edges))
        if weighted
        else np.ones(len(edges))
    )
    order = np.argsort(src, kind="stable")
    src, dst, w = src[order], dst[order], w[order]
    out_strength = np.bincount(src, weights=w, minlength=n)
    probs = w / out_strength[src] if len(edges) else w
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
    return indptr, dst, probs


def pagerank(
    g: FlowGraph,
    damping: float = 0.85,
    tol: float = 1e-12,
    max_iter: int = 1000,
    weighted: bool = True,
) -> PageRankResult:
    """Weighted PageRank by power iteration.

    The walk moves from u to v with probability w(u->v) over u's
    out-strength (or uniformly over out-edges when weighted=False);
    cities with no outgoing flow teleport uniformly. The result is a
    probability vector; hitting max_iter only clears the converged flag,
    it never raises.
    """
    if g.n_nodes == 0:
        raise NumericalError("pagerank undefined on an empty graph")
    if not 0.0 < damping < 1.0:
        raise DataError(f"damping must be in (0,1), got {damping}")
    if tol <= 0.0:
        raise DataError(f"tol must be positive, got {tol}")
    indptr, dst, probs = _transition_csr(g, weighted)
    pi, iterations, converged = _backend.pagerank_power(
        indptr, dst, probs, damping, tol, max_iter
    )
    values = {city: float(pi[i]) for i, city in enumerate(g.nodes)}
    return PageRankResult(values, iterations, bool(converged), damping)


def centrality_both(
    g: FlowGraph,
    damping: float = 0.85,
    tol: float = 1e-12,
    max_iter: int = 1000,
    weighted: bool = True,
) -> tuple[PageRankResult, PageRankResult]:
    """(downstream, upstream) PageRank: on the graph and on its reversal."""
    down = pagerank(g, damping, tol, max_iter, weighted)
    up = pagerank(reverse(g), damping, tol, max_iter, weighted)
    return down, up


def dependence_measures(g: FlowGraph) -> dict[str, Dependence]:
    """DOEC/DOES: the externally received/paid share of each city's volume.

    doec(i) = external_received / (external_received + internal_volume),
    does(i) symmetric on the paid side. A zero denominator leaves the
    entry absent (None) rather than zero.
    """
    ds = degrees_strengths(g)
    out: dict[str, Dependence] = {}
    for city in g.nodes:
        internal = g.internal_volume.get(city, 0)
        received = ds[city].total_received
        paid = ds[city].total_paid
        doec = received / (received + internal) if received + internal > 0 else None
        does = paid / (paid + internal) if paid + internal > 0 else None
        out[city] = Dependence(doec, does)
    return out


def normalize_to_max(values: dict[str, float]) -> dict[str, float]:
    """Divide by the maximum so the most central city reads 1.0 (100%)."""
    if not values:
        raise NumericalError("cannot normalize an empty map")
    top = max(values.values())
    if top <= 0.0:
        raise NumericalError("cannot normalize: no positive value")
    return {city: value / top for city, value in values.items()}


def smooth_two_year(series: dict[int, float]) -> dict[int, float]:
    """Trailing two-year mean; the first year passes through unchanged."""
    years = sorted(series)
    for previous, current in zip(years, years[1:]):
        if current != previous + 1:
            raise DataError(f"series years not consecutive at {previous}->{current}")
    out: dict[int, float] = {}
    for i, year in enumerate(years):
        if i == 0:
            out[year] = series[year]
        else:
            out[year] = 0.5 * (series[year] + series[year - 1])
    return out


def _tercile_split(ordered: list[str]) -> dict[str, str]:
    n = len(ordered)
    classes = {}
    for p, city in enumerate(ordered):
        if 3 * p < n:
            classes[city] = SIZE_SMALL
        elif 3 * p < 2 * n:
            classes[city] = SIZE_MEDIUM
        else:
            classes[city] = SIZE_LARGE
    return classes


def gdp_terciles(
    panel: CovariatePanel, cities: CityDirectory, year: int
) -> tuple[dict[str, str], list[str]]:
    """Small/medium/large classes from region-specific GDP terciles.

    Cities are ranked within their region by (gdp, city id) and split at
    the 1/3 and 2/3 quantiles. Regions with fewer than 3 classifiable
    cities fall back to the global terciles and are flagged.
    """
    gdp: dict[str, int] = {}
    for city in cities:
        row = panel.get(city, year)
        if row is not None and row.gdp_cents is not None:
            gdp[city] = row.gdp_cents
    if not gdp:
        raise DataError(f"no city has GDP for {year}")

    by_region: dict[str, list[str]] = {}
    for city in gdp:
        by_region.setdefault(cities.region_of(city), []).append(city)

    global_order = sorted(gdp, key=lambda c: (gdp[c], c))
    global_classes = _tercile_split(global_order)

    classes: dict[str, str] = {}
    flagged: list[str] = []
    for region in sorted(by_region):
        members = by_region[region]
        if len(members) < 3:
            flagged.append(region)
            for city in members:
                classes[city] = global_classes[city]
        else:
            order = sorted(members, key=lambda c: (gdp[c], c))
            classes.update(_tercile_split(order))
    return classes, flagged


def rank_measure(
    values: dict[str, float], top_k: int
) -> list[tuple[int, str, float]]:
    """Top-k cities by value, descending; ties broken by city id ascending."""
    if not values:
        raise DataError("cannot rank an empty map")
    ordered = sorted(values.items(), key=lambda kv: (-kv[1], kv[0]))
    return [(i + 1, city, value) for i, (city, value) in enumerate(ordered[:top_k])]


def global_measures(g: FlowGraph) -> GlobalMeasures:
    """Density/assortativity/diameter with degenerate cases set to None."""
    try:
        d = density(g)
    except NumericalError:
        d = None
    try:
        a = assortativity(g)
    except NumericalError:
        a = None
    try:
        dia = diameter(g)
    except NumericalError:
        dia = None
    return GlobalMeasures(g.period, d, a, dia)


def compute_measures(
    graphs: list[FlowGraph],
    damping: float = 0.85,
    tol: float = 1e-12,
    max_iter: int = 1000,
    weighted: bool = True,
) -> tuple[MeasureTable, list[GlobalMeasures]]:
    """Full per-city measure table plus global measures, one pass per year."""
    table = MeasureTable()
    globals_out: list[GlobalMeasures] = []
    for g in graphs:
        globals_out.append(global_measures(g))
        if g.n_nodes == 0:
            continue
        ds = degrees_strengths(g)
        down, up = centrality_both(g, damping, tol, max_iter, weighted)
        dep = dependence_measures(g)
        table.convergence[g.period] = (down.converged, up.converged)
        for city in g.nodes:
            table.rows[(city, g.period)] = MeasureRow(
                city=city,
                period=g.period,
                in_degree=ds[city].in_degree,
                out_degree=ds[city].out_degree,
                total_received=ds[city].total_received,
                total_paid=ds[city].total_paid,
                pagerank_down=down.values[city],
                pagerank_up=up.values[city],
                doec=dep[city].doec,
                does=dep[city].does,
            )
    return table, globals_out


def _fmt(value: float | None) -> str:
    return "" if value is None else format(value, ".12g")


def write_measures_csv(table: MeasureTable, period: int, out_dir: str | Path) -> Path:
    """Write measures_<year>.csv with 12-significant-digit floats."""
    path = Path(out_dir) / f"measures_{period}.csv"
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["city_id", "in_degree", "out_degree", "total_received_cents",
             "total_paid_cents", "pagerank_down", "pagerank_up", "doec", "does"]
        )
        cities = sorted(city for city, p in table.rows if p == period)
        for city in cities:
            row = table.rows[(city, period)]
            writer.writerow(
                [city, row.in_degree, row.out_degree, row.total_received,
                 row.total_paid, _fmt(row.pagerank_down), _fmt(row.pagerank_up),
                 _fmt(row.doec), _fmt(row.does)]
            )
    return path


def write_global_csv(measures: GlobalMeasures, out_dir: str | Path) -> Path:
    path = Path(out_dir) / f"global_{measures.period}.csv"
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["year", "density", "assortativity", "diameter"])
        writer.writerow(
            [measures.period, _fmt(measures.density), _fmt(measures.assortativity),
             "" if measures.diameter is None else measures.diameter]
        )
    return path


def read_measures_csv(path: str | Path, period: int, into: MeasureTable) -> None:
    """Load one measures_<year>.csv back into a MeasureTable."""
    path = Path(path)
    try:
        fh = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        expected = ["city_id", "in_degree", "out_degree", "total_received_cents",
                    "total_paid_cents", "pagerank_down", "pagerank_up", "doec", "does"]
        if header != expected:
            raise DataError(f"{path}: bad header {header!r}")
        for row in reader:
            if len(row) != len(expected):
                raise DataError(f"{path}:{reader.line_num}: wrong column count")
            city = row[0]
            into.rows[(city, period)] = MeasureRow(
                city=city,
                period=period,
                in_degree=int(row[1]),
                out_degree=int(row[2]),
                total_received=int(row[3]),
                total_paid=int(row[4]),
                pagerank_down=float(row[5]),
                pagerank_up=float(row[6]),
                doec=float(row[7]) if row[7] else None,
                does=float(row[8]) if row[8] else None,
            )


def read_global_csv(path: str | Path) -> GlobalMeasures:
    path = Path(path)
    try:
        fh = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["year", "density", "assortativity", "diameter"]:
            raise DataError(f"{path}: bad header {header!r}")
        row = next(reader, None)
        if row is None or len(row) != 4:
            raise DataError(f"{path}: missing data row")
        return GlobalMeasures(
            period=int(row[0]),
            density=float(row[1]) if row[1] else None,
            assortativity=float(row[2]) if row[2] else None,
            diameter=int(row[3]) if row[3] else None,
        )
