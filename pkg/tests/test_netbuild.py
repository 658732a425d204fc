import datetime as dt

from cityflows.ingest import FirmDirectory, FirmInfo, TransactionRecord, YearRange
from cityflows.netbuild import build_flow_graphs, dump_flow_graph, reverse

CITY_OF = {"F0": "A", "F1": "A", "F2": "B", "F3": "C", "F4": "C", "F5": "D"}
FIRMS = FirmDirectory({f: FirmInfo(c, False) for f, c in CITY_OF.items()})


def tx(payer, payee, amount, year=2020, day=1):
    return TransactionRecord(dt.date(year, 1, day), payer, payee, amount)


def oracle_aggregate(txs):
    """Independent group-by-and-sum over (year, payer city, payee city)."""
    edges, internal = {}, {}
    for t in txs:
        u, v = CITY_OF[t.payer_firm], CITY_OF[t.payee_firm]
        key = (t.date.year, u, v)
        if u == v:
            internal[key[:2] + (u,)] = internal.get(key[:2] + (u,), 0) + t.amount
        else:
            edges[key] = edges.get(key, 0) + t.amount
    return edges, internal


def test_single_cross_city_transaction():
    graphs = build_flow_graphs([tx("F0", "F2", 500)], FIRMS, YearRange(2020, 2020))
    (g,) = graphs
    assert g.edge_weight == {("A", "B"): 500}
    assert g.internal_volume == {}
    assert g.nodes == ("A", "B")


def test_intra_city_only():
    txs = [tx("F0", "F1", 100), tx("F1", "F0", 200)]
    (g,) = build_flow_graphs(txs, FIRMS, YearRange(2020, 2020))
    assert g.edge_weight == {}
    assert g.internal_volume == {"A": 300}


def test_random_against_groupby_oracle(rng):
    firm_ids = list(CITY_OF)
    txs = []
    for _ in range(200):
        payer, payee = rng.choice(firm_ids, size=2, replace=False)
        year = int(rng.integers(2019, 2022))
        txs.append(tx(payer, payee, int(rng.integers(1, 5000)), year=year))
    graphs = build_flow_graphs(txs, FIRMS, YearRange(2019, 2021))
    edges, internal = oracle_aggregate(txs)
    for g in graphs:
        assert g.edge_weight == {
            (u, v): w for (y, u, v), w in edges.items() if y == g.period
        }
        assert g.internal_volume == {
            c: w for (y, c), w in ((k[:2], w) for k, w in internal.items()) if y == g.period
        }


def test_order_independent(rng):
    txs = [
        tx("F0", "F2", 10), tx("F2", "F3", 20), tx("F0", "F2", 30),
        tx("F3", "F4", 40), tx("F0", "F1", 50),
    ]
    base = build_flow_graphs(txs, FIRMS, YearRange(2020, 2020))
    for _ in range(5):
        shuffled = list(txs)
        rng.shuffle(shuffled)
        assert build_flow_graphs(shuffled, FIRMS, YearRange(2020, 2020)) == base


def test_empty_period_yields_empty_graph():
    graphs = build_flow_graphs([tx("F0", "F2", 10)], FIRMS, YearRange(2020, 2021))
    assert graphs[1].period == 2021
    assert graphs[1].nodes == ()
    assert graphs[1].edge_weight == {}


def test_conservation_under_reverse(rng):
    txs = [
        tx(*rng.choice(list(CITY_OF), size=2, replace=False),
           int(rng.integers(1, 100)))
        for _ in range(50)
    ]
    (g,) = build_flow_graphs(txs, FIRMS, YearRange(2020, 2020))
    assert g.total_weight() == sum(t.amount for t in txs)
    assert reverse(g).total_weight() == g.total_weight()


def test_reverse_is_involution():
    txs = [tx("F0", "F2", 10), tx("F2", "F3", 20), tx("F3", "F0", 5)]
    (g,) = build_flow_graphs(txs, FIRMS, YearRange(2020, 2020))
    assert reverse(reverse(g)) == g
    assert reverse(g).orientation == "reversed"


def test_reverse_one_edge():
    (g,) = build_flow_graphs([tx("F0", "F2", 500)], FIRMS, YearRange(2020, 2020))
    assert reverse(g).edge_weight == {("B", "A"): 500}


def test_reverse_swaps_strength_vectors(rng):
    from cityflows.netmeasure import degrees_strengths

    g = None
    txs = [
        tx(*rng.choice(list(CITY_OF), size=2, replace=False),
           int(rng.integers(1, 100)))
        for _ in range(60)
    ]
    (g,) = build_flow_graphs(txs, FIRMS, YearRange(2020, 2020))
    fwd = degrees_strengths(g)
    back = degrees_strengths(reverse(g))
    for city in g.nodes:
        assert back[city].in_degree == fwd[city].out_degree
        assert back[city].total_received == fwd[city].total_paid
        assert back[city].out_degree == fwd[city].in_degree
        assert back[city].total_paid == fwd[city].total_received


def test_dump_files(tmp_path):
    txs = [tx("F0", "F2", 10), tx("F1", "F0", 7)]
    (g,) = build_flow_graphs(txs, FIRMS, YearRange(2020, 2020))
    dump_flow_graph(g, tmp_path)
    edges = (tmp_path / "flowgraph_2020.csv").read_text(encoding="utf-8")
    internal = (tmp_path / "internal_2020.csv").read_text(encoding="utf-8")
    assert edges == "payer_city,payee_city,weight_cents\nA,B,10\n"
    assert internal == "city,weight_cents\nA,7\n"
