"""Command-line orchestration: run each stage or the whole pipeline.

Every command writes its outputs atomically (built in a temporary sibling
directory, renamed into place on success) and leaves exactly one
manifest.json recording the tool version, parameter values, input file
digests and a timestamp. Timestamps live only in the manifest, so re-runs
with identical inputs produce byte-identical data files.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import datetime as dt
import hashlib
import json
import os
import shutil
import sys
from contextlib import contextmanager
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import __version__
from .concentration import compute_hhi_rows
from .dea import dea_output_nirs, instance_from_covariates, load_dea_units, write_dea_scores
from .econometrics import (
    OUTCOME_NAMES,
    assemble_panel,
    fit_fe_ols,
    write_panel_csv,
    write_regression_csv,
    write_regression_meta,
)
from .errors import CityflowsError, DataError, NumericalError
from .ingest import (
    CityDirectory,
    CovariatePanel,
    FirmDirectory,
    TransactionRecord,
    YearRange,
    filter_public_administration,
    load_cities,
    load_covariates,
    load_firms,
    load_transactions,
)
from .netbuild import FlowGraph, build_flow_graphs, dump_flow_graph, reverse
from .netmeasure import (
    GlobalMeasures,
    MeasureTable,
    compute_measures,
    gdp_terciles,
    normalize_to_max,
    rank_measure,
    read_global_csv,
    read_measures_csv,
    smooth_two_year,
    write_global_csv,
    write_measures_csv,
)
from .synth import SynthConfig, generate

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3

PIPELINE_KEYS = ("damping", "tol", "max_iter", "top_k")
TERCILES_RULE = "region-specific empirical terciles, ties by city id ascending"
RANKABLE = ("pagerank_down", "pagerank_up", "in_degree", "out_degree",
            "total_received", "total_paid", "doec", "does")


class UsageError(CityflowsError):
    """Bad invocation: wrong flags, missing arguments, occupied output."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); we own the codes
        raise UsageError(message)


# ------------------------------------------------------------- config file

def load_config_file(path: str | Path) -> dict[str, str]:
    """key=value lines; blank lines and #-comments ignored."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read config {path}: {exc}") from exc
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def merged_params(args) -> dict[str, str]:
    """Config-file values, overridden by whichever flags were given."""
    synth_keys = {f.name for f in fields(SynthConfig)}
    known = synth_keys | set(PIPELINE_KEYS)
    params = {
        "damping": "0.85", "tol": "1e-12", "max_iter": "1000", "top_k": "30",
    }
    if getattr(args, "config", None):
        file_params = load_config_file(args.config)
        unknown = sorted(set(file_params) - known)
        if unknown:
            raise UsageError(f"unknown config keys: {unknown}")
        params.update(file_params)
    for key in ("seed", "years", "damping", "top_k"):
        value = getattr(args, key.replace("-", "_"), None)
        if value is not None:
            params[key] = str(value)
    return params


def synth_config_from(params: dict[str, str]) -> SynthConfig:
    kwargs = {}
    converters = {
        "seed": int, "n_cities": int, "n_firms": int,
        "pareto_alpha": float, "gravity_decay": float,
        "intra_city_share": float, "recession_kill_fraction": float,
        "mean_tx_per_firm_year": float,
    }
    for name, convert in converters.items():
        if name in params:
            try:
                kwargs[name] = convert(params[name])
            except ValueError as exc:
                raise UsageError(f"bad value for {name}: {params[name]!r}") from exc
    if "years" in params:
        kwargs["years"] = YearRange.parse(params["years"])
    if "recession_year" in params:
        raw = params["recession_year"]
        kwargs["recession_year"] = None if raw.lower() in ("", "none") else int(raw)
    return SynthConfig(**kwargs)


def _num_params(params: dict[str, str]) -> tuple[float, float, int, int]:
    try:
        return (
            float(params["damping"]), float(params["tol"]),
            int(params["max_iter"]), int(params["top_k"]),
        )
    except ValueError as exc:
        raise UsageError(f"bad numeric parameter: {exc}") from exc


# --------------------------------------------------------- atomic outputs

@contextmanager
def atomic_dir(out: str | Path):
    """Build outputs in a temp dir; rename into place only on success."""
    out = Path(out)
    if out.exists():
        if not out.is_dir() or any(out.iterdir()):
            raise UsageError(f"output directory {out} exists and is not empty")
    out.parent.mkdir(parents=True, exist_ok=True)
    tmp = out.parent / f".{out.name}.tmp{os.getpid()}"
    if tmp.exists():
        shutil.rmtree(tmp)
    tmp.mkdir()
    try:
        yield tmp
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    if out.exists():
        out.rmdir()
    os.replace(tmp, out)


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with path.open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(
    out_dir: Path, command: str, parameters: dict, inputs: dict[str, Path] | None = None
) -> None:
    payload = {
        "tool": "cityflows",
        "version": __version__,
        "command": command,
        "parameters": parameters,
        "config_hash": hashlib.sha256(
            json.dumps(parameters, sort_keys=True, default=str).encode()
        ).hexdigest(),
        "input_digests": {
            name: _sha256(path) for name, path in sorted((inputs or {}).items())
        },
        "created_utc": dt.datetime.now(dt.timezone.utc).isoformat(),
    }
    (out_dir / "manifest.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n",
        encoding="utf-8",
    )


# ------------------------------------------------------------ dataset load

@dataclass
class Dataset:
    cities: CityDirectory
    firms: FirmDirectory
    transactions: list[TransactionRecord]
    covariates: CovariatePanel
    years: YearRange
    rejection_counts: dict[str, int]
    files: dict[str, Path]


def load_dataset(data_dir: str | Path, years: YearRange | None = None) -> Dataset:
    data_dir = Path(data_dir)
    files = {
        name: data_dir / f"{name}.csv"
        for name in ("cities", "firms", "transactions", "covariates")
    }
    cities = load_cities(files["cities"])
    firms = load_firms(files["firms"], cities)
    window = years if years is not None else YearRange(1, 9999)
    txs, report = load_transactions(files["transactions"], firms, window)
    txs = filter_public_administration(txs, firms)
    covariates, cov_report = load_covariates(files["covariates"], cities)
    if years is None:
        if not txs:
            raise DataError(f"{files['transactions']}: no usable transactions")
        observed = [tx.date.year for tx in txs]
        years = YearRange(min(observed), max(observed))
    counts = report.counts()
    for reason, count in cov_report.counts().items():
        counts[f"covariates: {reason}"] = count
    return Dataset(cities, firms, txs, covariates, years, counts, files)


def _read_measures_dir(measures_dir: str | Path) -> tuple[MeasureTable, list[GlobalMeasures]]:
    measures_dir = Path(measures_dir)
    table = MeasureTable()
    globals_out = []
    paths = sorted(measures_dir.glob("measures_*.csv"))
    if not paths:
        raise DataError(f"no measures_<year>.csv files in {measures_dir}")
    for path in paths:
        year = int(path.stem.split("_")[1])
        read_measures_csv(path, year, into=table)
        global_path = measures_dir / f"global_{year}.csv"
        if global_path.exists():
            globals_out.append(read_global_csv(global_path))
    return table, globals_out


# ------------------------------------------------------------ stage bodies

def run_build(ds: Dataset, out_dir: Path, orientation: str) -> list[FlowGraph]:
    graphs = build_flow_graphs(ds.transactions, ds.firms, ds.years)
    for g in graphs:
        dump_flow_graph(reverse(g) if orientation == "reversed" else g, out_dir)
    return graphs


def run_measures(
    ds: Dataset, out_dir: Path, damping: float, tol: float, max_iter: int
) -> tuple[MeasureTable, list[GlobalMeasures]]:
    graphs = build_flow_graphs(ds.transactions, ds.firms, ds.years)
    table, global_rows = compute_measures(graphs, damping, tol, max_iter)
    for year in ds.years:
        write_measures_csv(table, year, out_dir)
    for row in global_rows:
        write_global_csv(row, out_dir)
    return table, global_rows


def run_rank(
    table: MeasureTable, measure: str, year: int, top_k: int, out_dir: Path
) -> Path:
    if measure not in RANKABLE:
        raise UsageError(f"measure must be one of {RANKABLE}")
    values = table.per_city(year, measure)
    if not values:
        raise DataError(f"no values for {measure} in {year}")
    ranking = rank_measure(values, top_k)
    top_value = ranking[0][2]
    path = out_dir / f"ranking_{measure}_{year}.csv"
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["rank", "city_id", "value", "relative_to_top"])
        for rank, city, value in ranking:
            relative = format(value / top_value, ".12g") if top_value > 0 else ""
            writer.writerow([rank, city, format(value, ".12g"), relative])
    return path


def _dea_by_year(
    ds: Dataset, years: list[int], out_dir: Path | None
) -> tuple[dict, dict[str, list[str]]]:
    scores_by_year = {}
    skipped_by_year: dict[str, list[str]] = {}
    for year in years:
        inst, skipped = instance_from_covariates(ds.covariates, ds.cities, year)
        if skipped:
            skipped_by_year[str(year)] = skipped
        if inst is None:
            continue
        if out_dir is not None:
            units_path = out_dir / f"dea_units_{year}.csv"
            with units_path.open("w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(
                    ["unit_id", "backlog", "expenditures_cents", "completed_cases"]
                )
                for i, unit in enumerate(inst.units):
                    writer.writerow(
                        [unit, format(inst.inputs[i, 0], ".12g"),
                         format(inst.inputs[i, 1], ".12g"),
                         format(inst.outputs[i, 0], ".12g")]
                    )
        scores = dea_output_nirs(inst)
        scores_by_year[year] = scores
        if out_dir is not None:
            write_dea_scores(scores, out_dir / f"dea_scores_{year}.csv")
    return scores_by_year, skipped_by_year


def run_regress(ds: Dataset, table: MeasureTable, out_dir: Path) -> dict:
    years = sorted({period for _, period in table.rows})
    dea_scores, dea_skipped = _dea_by_year(ds, years, out_dir)
    hhi = compute_hhi_rows(ds.covariates)
    panel = assemble_panel(table, ds.covariates, hhi, dea_scores, ds.cities)
    if panel.n_rows == 0:
        raise DataError("regression panel is empty after listwise deletion")
    write_panel_csv(panel, out_dir / "panel.csv")
    fits = [fit_fe_ols(panel, outcome) for outcome in OUTCOME_NAMES]
    for fit in fits:
        write_regression_csv(fit, out_dir)
    write_regression_meta(fits, out_dir)
    return {
        "panel_rows": panel.n_rows,
        "rows_deleted": panel.deleted,
        "cr_factor": {fit.outcome: fit.cr_factor for fit in fits},
        "dea_states_skipped": dea_skipped,
    }


def _ols_slope(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    x_centered = x - x.mean()
    slope = float((x_centered * (y - y.mean())).sum() / (x_centered**2).sum())
    return slope, float(y.mean() - slope * x.mean())


def run_report(
    ds: Dataset, table: MeasureTable, global_rows: list[GlobalMeasures], out_dir: Path
) -> dict:
    years = sorted({period for _, period in table.rows})

    # Per-region centrality series: normalize to the top city, average by
    # region, then smooth with the trailing two-year window.
    for orientation, column in (("down", "pagerank_down"), ("up", "pagerank_up")):
        per_region: dict[str, dict[int, float]] = {}
        for year in years:
            normalized = normalize_to_max(table.per_city(year, column))
            sums: dict[str, list[float]] = {}
            for city, value in normalized.items():
                sums.setdefault(ds.cities.region_of(city), []).append(value)
            for region, values in sums.items():
                per_region.setdefault(region, {})[year] = float(np.mean(values))
        path = out_dir / f"report_centrality_{orientation}.csv"
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["region", "year", "mean_normalized_centrality"])
            for region in sorted(per_region):
                smoothed = smooth_two_year(per_region[region])
                for year in sorted(smoothed):
                    writer.writerow([region, year, format(smoothed[year], ".12g")])

    with (out_dir / "report_topology.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["year", "density", "assortativity", "diameter"])
        for row in sorted(global_rows, key=lambda r: r.period):
            writer.writerow(
                [row.period,
                 "" if row.density is None else format(row.density, ".12g"),
                 "" if row.assortativity is None else format(row.assortativity, ".12g"),
                 "" if row.diameter is None else row.diameter]
            )

    # DOEC/DOES by regional GDP tercile.
    with (out_dir / "report_dependence_terciles.csv").open(
        "w", newline="", encoding="utf-8"
    ) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["year", "region", "size_class", "mean_doec", "mean_does", "n_cities"]
        )
        for year in years:
            classes, _ = gdp_terciles(ds.covariates, ds.cities, year)
            cells: dict[tuple[str, str], list[tuple[float | None, float | None]]] = {}
            for (city, period), row in table.rows.items():
                if period != year or city not in classes:
                    continue
                key = (ds.cities.region_of(city), classes[city])
                cells.setdefault(key, []).append((row.doec, row.does))
            for (region, size_class) in sorted(cells):
                pairs = cells[(region, size_class)]
                doecs = [d for d, _ in pairs if d is not None]
                doeses = [s for _, s in pairs if s is not None]
                writer.writerow(
                    [year, region, size_class,
                     format(float(np.mean(doecs)), ".12g") if doecs else "",
                     format(float(np.mean(doeses)), ".12g") if doeses else "",
                     len(pairs)]
                )

    # Scatter pairs and pooled OLS slope: downstream centrality vs log GDP.
    xs, ys = [], []
    scatter_path = out_dir / "report_scatter_centrality_gdp.csv"
    with scatter_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["city_id", "year", "log_gdp", "pagerank_down", "is_capital"])
        for (city, year) in sorted(table.rows):
            row = table.rows[(city, year)]
            cov = ds.covariates.get(city, year)
            if cov is None or cov.gdp_cents is None or cov.gdp_cents <= 0:
                continue
            log_gdp = float(np.log(cov.gdp_cents / 100.0))
            xs.append(log_gdp)
            ys.append(row.pagerank_down)
            writer.writerow(
                [city, year, format(log_gdp, ".12g"),
                 format(row.pagerank_down, ".12g"),
                 int(ds.cities.lookup(city).is_capital)]
            )
    if len(xs) < 2:
        raise DataError("not enough (centrality, gdp) pairs for the scatter fit")
    slope, intercept = _ols_slope(np.array(xs), np.array(ys))
    with (out_dir / "report_scatter_fit.csv").open(
        "w", newline="", encoding="utf-8"
    ) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["slope", "intercept", "n_points"])
        writer.writerow([format(slope, ".12g"), format(intercept, ".12g"), len(xs)])
    return {"scatter_slope": slope, "scatter_points": len(xs)}


# ---------------------------------------------------------------- commands

def cmd_synth(args) -> int:
    params = merged_params(args)
    config = synth_config_from(params)
    inputs = {"config": Path(args.config)} if args.config else {}
    with atomic_dir(args.out) as tmp:
        generate(config, tmp)
        write_manifest(tmp, "synth", params, inputs)
    return EXIT_OK


def cmd_build(args) -> int:
    years = YearRange.parse(args.years) if args.years else None
    ds = load_dataset(args.data, years)
    with atomic_dir(args.out) as tmp:
        run_build(ds, tmp, args.orientation)
        write_manifest(
            tmp, "build",
            {"years": f"{ds.years.start}..{ds.years.end}",
             "orientation": args.orientation,
             "rows_rejected": ds.rejection_counts},
            ds.files,
        )
    return EXIT_OK


def cmd_measures(args) -> int:
    params = merged_params(args)
    damping, tol, max_iter, _ = _num_params(params)
    years = YearRange.parse(params["years"]) if "years" in params else None
    ds = load_dataset(args.data, years)
    with atomic_dir(args.out) as tmp:
        table, _ = run_measures(ds, tmp, damping, tol, max_iter)
        write_manifest(
            tmp, "measures",
            {"damping": damping, "tol": tol, "max_iter": max_iter,
             "years": f"{ds.years.start}..{ds.years.end}",
             "pagerank_converged": {
                 str(year): list(flags) for year, flags in sorted(table.convergence.items())
             },
             "rows_rejected": ds.rejection_counts},
            ds.files,
        )
    return EXIT_OK


def cmd_rank(args) -> int:
    table, _ = _read_measures_dir(args.measures)
    with atomic_dir(args.out) as tmp:
        run_rank(table, args.measure, args.year, args.top_k, tmp)
        write_manifest(
            tmp, "rank",
            {"measure": args.measure, "year": args.year, "top_k": args.top_k},
            {"measures_dir": Path(args.measures) / f"measures_{args.year}.csv"},
        )
    return EXIT_OK


def cmd_dea(args) -> int:
    inst = load_dea_units(args.units)
    with atomic_dir(args.out) as tmp:
        scores = dea_output_nirs(inst, returns=args.returns)
        write_dea_scores(scores, tmp / "dea_scores.csv")
        write_manifest(
            tmp, "dea",
            {"returns": args.returns, "n_units": inst.n_units},
            {"units": Path(args.units)},
        )
    return EXIT_OK


def cmd_regress(args) -> int:
    ds = load_dataset(args.data)
    table, _ = _read_measures_dir(args.measures)
    with atomic_dir(args.out) as tmp:
        info = run_regress(ds, table, tmp)
        write_manifest(
            tmp, "regress",
            {"cr_small_sample": "CR1: G/(G-1) * (N-1)/(N-K), K includes absorbed groups",
             "zscore": "outcomes standardized on the estimation sample",
             **info},
            ds.files,
        )
    return EXIT_OK


def cmd_report(args) -> int:
    ds = load_dataset(args.data)
    table, global_rows = _read_measures_dir(args.measures)
    with atomic_dir(args.out) as tmp:
        info = run_report(ds, table, global_rows, tmp)
        write_manifest(
            tmp, "report",
            {"terciles_rule": TERCILES_RULE, "smoothing": "trailing two-year mean",
             **info},
            ds.files,
        )
    return EXIT_OK


def cmd_pipeline(args) -> int:
    params = merged_params(args)
    config = synth_config_from(params)
    damping, tol, max_iter, top_k = _num_params(params)
    inputs = {"config": Path(args.config)} if args.config else {}
    with atomic_dir(args.out) as tmp:
        dataset_dir = tmp / "dataset"
        dataset_dir.mkdir()
        generate(config, dataset_dir)
        write_manifest(dataset_dir, "synth", params, inputs)

        ds = load_dataset(dataset_dir, config.years)

        graphs_dir = tmp / "graphs"
        graphs_dir.mkdir()
        run_build(ds, graphs_dir, "money-flow")
        write_manifest(graphs_dir, "build", {"orientation": "money-flow"}, ds.files)

        measures_dir = tmp / "measures"
        measures_dir.mkdir()
        table, global_rows = run_measures(ds, measures_dir, damping, tol, max_iter)
        write_manifest(
            measures_dir, "measures",
            {"damping": damping, "tol": tol, "max_iter": max_iter}, ds.files,
        )

        ranking_dir = tmp / "ranking"
        ranking_dir.mkdir()
        run_rank(table, "pagerank_down", config.years.end, top_k, ranking_dir)
        write_manifest(
            ranking_dir, "rank",
            {"measure": "pagerank_down", "year": config.years.end, "top_k": top_k},
        )

        regression_dir = tmp / "regression"
        regression_dir.mkdir()
        regress_info = run_regress(ds, table, regression_dir)
        write_manifest(
            regression_dir, "regress",
            {"cr_small_sample": "CR1: G/(G-1) * (N-1)/(N-K), K includes absorbed groups",
             **regress_info},
            ds.files,
        )

        report_dir = tmp / "report"
        report_dir.mkdir()
        report_info = run_report(ds, table, global_rows, report_dir)
        write_manifest(
            report_dir, "report",
            {"terciles_rule": TERCILES_RULE, **report_info},
        )

        write_manifest(
            tmp, "pipeline",
            {**params, "rows_rejected": ds.rejection_counts,
             "scatter_slope": report_info["scatter_slope"]},
            inputs,
        )
    return EXIT_OK


# ------------------------------------------------------------------- main

def build_parser() -> _Parser:
    parser = _Parser(
        prog="cityflows",
        description="City-level supply-chain network analytics from wire transfers",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--years")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("build", help="dump per-year flow graphs")
    p.add_argument("--data", required=True, help="dataset directory")
    p.add_argument("--out", required=True)
    p.add_argument("--years")
    p.add_argument("--orientation", choices=("money-flow", "reversed"),
                   default="money-flow")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("measures", help="compute per-city and global measures")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.add_argument("--years")
    p.add_argument("--damping", type=float)
    p.set_defaults(func=cmd_measures)

    p = sub.add_parser("rank", help="top-k cities by a measure")
    p.add_argument("--measures", required=True, help="measures directory")
    p.add_argument("--measure", required=True)
    p.add_argument("--year", required=True, type=int)
    p.add_argument("--top-k", type=int, default=30)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("dea", help="courts-efficiency scores for a units file")
    p.add_argument("--units", required=True, help="dea_units.csv")
    p.add_argument("--returns", choices=("nirs", "crs", "vrs"), default="nirs")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_dea)

    p = sub.add_parser("regress", help="fixed-effects regressions, all outcomes")
    p.add_argument("--data", required=True)
    p.add_argument("--measures", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_regress)

    p = sub.add_parser("report", help="plot-ready series and scatter data")
    p.add_argument("--data", required=True)
    p.add_argument("--measures", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("pipeline", help="synth + build + measures + regress + report")
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--years")
    p.add_argument("--damping", type=float)
    p.add_argument("--top-k", type=int)
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    command = "?"
    try:
        args = parser.parse_args(argv)
        command = args.command
        return args.func(args)
    except UsageError as exc:
        print(f"cityflows {command}: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"cityflows {command}: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"cityflows {command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
