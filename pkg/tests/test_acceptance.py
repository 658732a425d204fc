"""Acceptance suite: one test per criterion, tolerances pinned.

Run with `pytest tests/test_acceptance.py -v -s` to see one PASS line per
criterion. Oracles are the independent brute-force implementations from
the per-module test files (dense power iteration, dict BFS, LP basis
enumeration, explicit-dummies OLS).
"""

import csv
import time
from pathlib import Path

import numpy as np
import pytest

from cityflows.cli import main
from cityflows.concentration import hhi_bank_credit, hhi_jobs
from cityflows.dea import DeaInstance, dea_output_nirs
from cityflows.econometrics import fit_fe_ols
from cityflows.errors import NumericalError
from cityflows.ingest import YearRange, load_cities, load_firms, \
    load_transactions, filter_public_administration
from cityflows.netbuild import build_flow_graphs
from cityflows import netmeasure as nm
from cityflows.synth import SynthConfig, generate, known_beta_panel

from conftest import make_graph, random_graph
from test_dea import dea_oracle
from test_netmeasure import (
    oracle_degrees,
    oracle_dependence,
    oracle_diameter,
    oracle_pagerank,
)


def _passed(line: str) -> None:
    print(f"ACCEPTANCE {line}: PASS", flush=True)


@pytest.fixture(scope="session")
def pipeline_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("acceptance") / "run"
    start = time.monotonic()
    code = main(["pipeline", "--out", str(out), "--seed", "42"])
    elapsed = time.monotonic() - start
    assert code == 0
    return out, elapsed


def _oracle_assortativity_or_none(g):
    if g.n_edges < 2:
        return None
    deg = oracle_degrees(g)
    xs = np.array([deg[u][1] for (u, v) in g.edge_weight], dtype=float)
    ys = np.array([deg[v][0] for (u, v) in g.edge_weight], dtype=float)
    if xs.std() == 0.0 or ys.std() == 0.0:
        return None
    return float(np.corrcoef(xs, ys)[0, 1])


def test_criterion_1_graph_oracle_equivalence():
    rng = np.random.default_rng(9001)
    start = time.monotonic()
    for trial in range(50):
        g = random_graph(rng, int(rng.integers(2, 7)), edge_prob=0.45)

        assert nm.density(g) == pytest.approx(
            g.n_edges / (g.n_nodes * (g.n_nodes - 1)), abs=1e-10
        )

        got = nm.degrees_strengths(g)
        want = oracle_degrees(g)
        for city in g.nodes:
            assert tuple(got[city]) == want[city]

        want_assort = _oracle_assortativity_or_none(g)
        try:
            got_assort = nm.assortativity(g)
        except NumericalError:
            got_assort = None
        if want_assort is None:
            assert got_assort is None
        else:
            assert got_assort == pytest.approx(want_assort, abs=1e-10)

        assert nm.diameter(g) == oracle_diameter(g)

        pagerank = nm.pagerank(g).values
        dense = oracle_pagerank(g, damping=0.85, steps=1000)
        for city in g.nodes:
            assert pagerank[city] == pytest.approx(dense[city], abs=1e-8)

        dep = nm.dependence_measures(g)
        for city, (doec, does) in oracle_dependence(g).items():
            for got_value, want_value in ((dep[city].doec, doec), (dep[city].does, does)):
                if want_value is None:
                    assert got_value is None
                else:
                    assert got_value == pytest.approx(want_value, abs=1e-10)
    elapsed = time.monotonic() - start
    assert elapsed < 5.0, f"oracle sweep took {elapsed:.2f}s"
    _passed("1 graph-measure oracle equivalence (50 graphs, <5s)")


def test_criterion_2_pagerank_contract():
    rng = np.random.default_rng(9002)
    graphs = [random_graph(rng, int(rng.integers(2, 25)), edge_prob=0.3)
              for _ in range(12)]
    for damping in (0.5, 0.85, 0.99):
        for g in graphs:
            result = nm.pagerank(g, damping=damping)
            assert sum(result.values.values()) == pytest.approx(1.0, abs=1e-9)
            assert min(result.values.values()) >= 0.0
    for g in graphs[:6]:
        scaled = make_graph(
            [(u, v, w * 1009) for (u, v), w in g.edge_weight.items()],
            internal=g.internal_volume,
        )
        base = nm.pagerank(g).values
        rescaled = nm.pagerank(scaled).values
        for city in g.nodes:
            assert rescaled[city] == pytest.approx(base[city], abs=1e-12)
    _passed("2 pagerank probability contract and rescale invariance")


def test_criterion_3_dea_oracle_and_invariance():
    rng = np.random.default_rng(9003)
    for _ in range(30):
        n = int(rng.integers(1, 6))
        inst = DeaInstance(
            tuple(f"u{i}" for i in range(n)),
            rng.uniform(0.5, 10.0, (n, 2)),
            rng.uniform(0.5, 10.0, (n, 1)),
        )
        scores = dea_output_nirs(inst)
        for o, unit in enumerate(inst.units):
            assert scores.scores[unit].phi == pytest.approx(
                dea_oracle(inst, o), abs=1e-7
            )
        assert max(s.efficiency for s in scores.scores.values()) == pytest.approx(
            1.0, abs=1e-9
        )
        scaled_inputs = inst.inputs.copy()
        scaled_inputs[:, 1] *= 250.0
        rescaled = dea_output_nirs(
            DeaInstance(inst.units, scaled_inputs, inst.outputs)
        )
        for unit in inst.units:
            assert rescaled.efficiency(unit) == pytest.approx(
                scores.efficiency(unit), abs=1e-9
            )
    planted = DeaInstance(
        ("u1", "u2", "u3"),
        [[2.0, 2.0], [4.0, 4.0], [4.0, 4.0]],
        [[2.0], [4.0], [2.0]],
    )
    assert dea_output_nirs(planted).efficiency("u3") == pytest.approx(0.5, abs=1e-9)
    _passed("3 DEA vertex-enumeration oracle, frontier, unit invariance")


def test_criterion_4_econometrics():
    panel, _ = known_beta_panel(seed=4001, beta=[2.0, -1.0], noise_sd=0.0,
                                n_cities=60, years=YearRange(2011, 2014))
    fit = fit_fe_ols(panel, "y", zscore_outcome=False)
    np.testing.assert_allclose(fit.beta, [2.0, -1.0], atol=1e-8)

    small, _ = known_beta_panel(seed=4002, beta=[1.0, 0.5], noise_sd=1.0,
                                n_cities=40, years=YearRange(2011, 2015))
    assert small.n_rows <= 200
    fwl = fit_fe_ols(small, "y", zscore_outcome=False)
    ids, labels = small.group_ids()
    dummies = np.zeros((small.n_rows, len(labels)))
    dummies[np.arange(small.n_rows), ids] = 1.0
    x = np.column_stack([small.regressors[n] for n in small.regressors])
    coef, *_ = np.linalg.lstsq(
        np.column_stack([x, dummies]), small.outcomes["y"], rcond=None
    )
    np.testing.assert_allclose(fwl.beta, coef[: x.shape[1]], atol=1e-8)

    raw = fit_fe_ols(small, "y", zscore_outcome=False)
    standardized = fit_fe_ols(small, "y", zscore_outcome=True)
    np.testing.assert_allclose(raw.tstats, standardized.tstats, atol=1e-10)

    truth = np.array([1.0, -2.0, 0.5])
    hits = 0
    for seed in range(40):
        noisy, _ = known_beta_panel(seed=seed, beta=list(truth), noise_sd=1.0,
                                    n_cities=500, years=YearRange(2010, 2019))
        assert noisy.n_rows == 5000
        fit = fit_fe_ols(noisy, "y", zscore_outcome=False)
        if (np.abs(fit.beta - truth) <= 3 * fit.se).all():
            hits += 1
    assert hits >= 38, f"only {hits}/40 seeds inside 3 clustered SEs"
    _passed("4 econometrics: planted beta, FWL, t invariance, coverage "
            f"({hits}/40)")


def _topology_rows(run_dir: Path):
    with (run_dir / "report" / "report_topology.csv").open(
        newline="", encoding="utf-8"
    ) as fh:
        return list(csv.DictReader(fh))


def test_criterion_5_qualitative_replication(pipeline_run, tmp_path):
    run_dir, elapsed = pipeline_run
    assert elapsed < 60.0, f"pipeline took {elapsed:.1f}s"

    rows = _topology_rows(run_dir)
    assert len(rows) == 10
    assert all(float(r["assortativity"]) < 0 for r in rows)  # (a)
    assert all(0.0 < float(r["density"]) < 0.1 for r in rows)  # (d)

    with (run_dir / "report" / "report_scatter_fit.csv").open(
        newline="", encoding="utf-8"
    ) as fh:
        fit = next(csv.DictReader(fh))
    assert float(fit["slope"]) > 0.0  # (c)

    # (b) recession re-run: kill the bottom 40% of firms by size.
    config = SynthConfig(recession_kill_fraction=0.4)
    paths = generate(config, tmp_path / "recession")
    cities = load_cities(paths["cities"])
    firms = load_firms(paths["firms"], cities)
    txs, _ = load_transactions(paths["transactions"], firms, config.years)
    txs = filter_public_administration(txs, firms)
    graphs = build_flow_graphs(txs, firms, config.years)
    values = {g.period: nm.assortativity(g) for g in graphs}
    pre = np.mean([values[y] for y in range(2008, config.recession_year)])
    post = np.mean(
        [values[y] for y in range(config.recession_year, config.years.end + 1)]
    )
    assert post < pre
    _passed(
        "5 qualitative replication: negative assortativity, recession drop "
        f"({pre:.3f} -> {post:.3f}), positive GDP slope, sparse density, "
        f"pipeline {elapsed:.1f}s"
    )


def test_criterion_6_hhi_bounds_and_scale():
    rng = np.random.default_rng(9006)
    for hhi, k in ((hhi_bank_credit, 3), (hhi_jobs, 5)):
        for _ in range(500):
            shares = rng.uniform(0.0, 100.0, size=k)
            if shares.sum() == 0.0:
                shares[0] = 1.0
            value = hhi(*shares)
            assert 1.0 / k - 1e-12 <= value <= 1.0 + 1e-12
            scale = float(rng.uniform(0.001, 1000.0))
            assert hhi(*(shares * scale)) == pytest.approx(value, abs=1e-12)
    assert hhi_bank_credit(7.0, 0.0, 0.0) == 1.0
    assert hhi_jobs(0.0, 0.0, 9.0, 0.0, 0.0) == 1.0
    assert hhi_bank_credit(5.0, 5.0, 5.0) == pytest.approx(1.0 / 3.0, abs=1e-15)
    assert hhi_jobs(2.0, 2.0, 2.0, 2.0, 2.0) == pytest.approx(0.2, abs=1e-15)
    _passed("6 HHI bounds and scale invariance on 1000 random sector vectors")


def test_criterion_7_pipeline_determinism(pipeline_run, tmp_path_factory):
    first, _ = pipeline_run
    second = tmp_path_factory.mktemp("acceptance7") / "run"
    assert main(["pipeline", "--out", str(second), "--seed", "42"]) == 0
    compared = 0
    for pattern in ("measures/*.csv", "regression/*.csv"):
        for path in sorted(first.glob(pattern)):
            other = second / path.relative_to(first)
            assert other.read_bytes() == path.read_bytes(), f"{path.name} differs"
            compared += 1
    assert compared > 30  # measures + DEA + regression files all checked
    _passed(f"7 determinism: {compared} measure/DEA/regression CSVs byte-identical")
