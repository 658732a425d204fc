"""Fixed-effects panel regression of network measures on city covariates.

The region-by-year intercepts are absorbed by within-group demeaning
(exact, and much cheaper than dummies at hundreds of groups); outcomes
are Z-scored on the estimation sample; variances use the city-clustered
sandwich with the CR1 finite-sample factor. Every step is deterministic:
identical panel in, identical report out.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .concentration import HhiRow
from .dea import DeaScores
from .errors import DataError, NumericalError
from .ingest import CityDirectory, CovariatePanel
from .netmeasure import MeasureTable

OUTCOME_NAMES = (
    "pagerank_down", "pagerank_up", "in_degree", "out_degree",
    "total_received", "total_paid",
)
REGRESSOR_NAMES = (
    "log_gdp", "exports_over_gdp", "credit_over_gdp", "gini", "doec", "does",
    "hhi_bank", "hhi_jobs", "hdi", "courts_efficiency",
)


@dataclass
class PanelDataset:
    """City-year rows: outcome and regressor columns plus group/cluster keys.

    Rows are complete by construction (listwise deletion happens in
    assemble_panel, with counts kept in `deleted`).
    """

    cities: list[str]
    years: list[int]
    regions: list[str]
    outcomes: dict[str, np.ndarray]
    regressors: dict[str, np.ndarray]
    deleted: dict[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        n = len(self.cities)
        if len(self.years) != n or len(self.regions) != n:
            raise DataError("panel key columns have unequal lengths")
        for name, col in list(self.outcomes.items()) + list(self.regressors.items()):
            col = np.asarray(col, dtype=float)
            if col.shape != (n,):
                raise DataError(f"panel column {name!r} has wrong length")
            if not np.isfinite(col).all():
                raise DataError(f"panel column {name!r} contains non-finite values")
            (self.outcomes if name in self.outcomes else self.regressors)[name] = col

    @property
    def n_rows(self) -> int:
        return len(self.cities)

    def group_labels(self) -> list[tuple[str, int]]:
        return [(r, y) for r, y in zip(self.regions, self.years)]

    def group_ids(self) -> tuple[np.ndarray, list[tuple[str, int]]]:
        """Region-by-year group index per row plus the sorted label list."""
        labels = sorted(set(self.group_labels()))
        index = {label: i for i, label in enumerate(labels)}
        ids = np.fromiter(
            (index[label] for label in self.group_labels()), dtype=np.int64,
            count=self.n_rows,
        )
        return ids, labels

    def cluster_ids(self) -> tuple[np.ndarray, list[str]]:
        labels = sorted(set(self.cities))
        index = {label: i for i, label in enumerate(labels)}
        ids = np.fromiter(
            (index[c] for c in self.cities), dtype=np.int64, count=self.n_rows
        )
        return ids, labels


@dataclass(frozen=True)
class FeRegressionFit:
    outcome: str
    regressors: tuple[str, ...]
    beta: np.ndarray
    se: np.ndarray
    tstats: np.ndarray
    n_obs: int
    n_groups: int
    n_clusters: int
    r2: float
    cr_factor: float


def zscore(values: np.ndarray, name: str = "variable") -> np.ndarray:
    """Center and scale to sample standard deviation one (denominator n-1)."""
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        raise NumericalError(f"zscore of {name}: needs at least 2 values")
    sd = values.std(ddof=1)
    if sd == 0.0:
        raise NumericalError(f"zscore of {name}: zero variance")
    return (values - values.mean()) / sd


def _demean_matrix(matrix: np.ndarray, group_ids: np.ndarray, n_groups: int) -> np.ndarray:
    counts = np.bincount(group_ids, minlength=n_groups).astype(float)
    out = matrix.astype(float).copy()
    for j in range(out.shape[1]):
        sums = np.bincount(group_ids, weights=out[:, j], minlength=n_groups)
        out[:, j] -= (sums / counts)[group_ids]
    return out


def within_demean(panel: PanelDataset) -> tuple[PanelDataset, list[tuple[str, int]]]:
    """Subtract region-by-year group means from every numeric column.

    Rows in singleton groups become all-zero; their group labels are
    returned so callers can see how much identifying variation was lost.
    """
    ids, labels = panel.group_ids()
    n_groups = len(labels)
    names = list(panel.outcomes) + list(panel.regressors)
    stacked = np.column_stack([panel.outcomes.get(n, panel.regressors.get(n)) for n in names])
    demeaned = _demean_matrix(stacked, ids, n_groups)
    outcomes = {n: demeaned[:, i] for i, n in enumerate(names) if n in panel.outcomes}
    regressors = {
        n: demeaned[:, i] for i, n in enumerate(names) if n in panel.regressors
    }
    counts = np.bincount(ids, minlength=n_groups)
    flagged = [labels[i] for i in np.flatnonzero(counts == 1)]
    result = PanelDataset(
        cities=list(panel.cities),
        years=list(panel.years),
        regions=list(panel.regions),
        outcomes=outcomes,
        regressors=regressors,
        deleted=dict(panel.deleted),
    )
    return result, flagged


def _collinear_columns(x: np.ndarray, names: tuple[str, ...]) -> list[str]:
    """Names of columns involved in the null space of a rank-deficient X."""
    _, s, vt = np.linalg.svd(x, full_matrices=True)
    cutoff = max(x.shape) * np.finfo(float).eps * (s[0] if s.size else 0.0)
    null_rows = vt[sum(s > cutoff):]
    involved = {
        names[j]
        for row in null_rows
        for j in np.flatnonzero(np.abs(row) > 1e-8)
    }
    return sorted(involved)


def fit_fe_ols(
    panel: PanelDataset,
    outcome: str,
    zscore_outcome: bool = True,
) -> FeRegressionFit:
    """OLS with region-by-year effects absorbed and city-clustered errors.

    beta comes from a least-squares solve of the demeaned system via SVD;
    the variance is the clustered sandwich scaled by the CR1 factor
    G/(G-1) * (N-1)/(N-K) with K counting regressors plus absorbed
    groups. R-squared is computed on the demeaned (within) data.
    """
    if outcome not in panel.outcomes:
        raise DataError(f"unknown outcome {outcome!r}")
    names = tuple(panel.regressors)
    y = panel.outcomes[outcome].copy()
    if zscore_outcome:
        y = zscore(y, outcome)
    x = np.column_stack([panel.regressors[name] for name in names])

    group_ids, group_labels = panel.group_ids()
    cluster_ids, cluster_labels = panel.cluster_ids()
    n_obs = panel.n_rows
    n_groups = len(group_labels)
    n_clusters = len(cluster_labels)
    if n_clusters < 2:
        raise DataError("clustered errors need at least 2 clusters")

    stacked = _demean_matrix(np.column_stack([y, x]), group_ids, n_groups)
    y_w = stacked[:, 0]
    x_w = stacked[:, 1:]

    rank = np.linalg.matrix_rank(x_w)
    if rank < len(names):
        collinear = _collinear_columns(x_w, names)
        raise DataError(f"collinear regressors after demeaning: {collinear}")

    beta, *_ = np.linalg.lstsq(x_w, y_w, rcond=None)
    resid = y_w - x_w @ beta

    k_absorbed = len(names) + n_groups
    if n_obs <= k_absorbed:
        raise NumericalError(
            f"too few observations ({n_obs}) for {k_absorbed} parameters"
        )
    xtx_inv = np.linalg.inv(x_w.T @ x_w)
    meat = np.zeros((len(names), len(names)))
    order = np.argsort(cluster_ids, kind="stable")
    sorted_clusters = cluster_ids[order]
    boundaries = np.flatnonzero(np.diff(sorted_clusters)) + 1
    for block in np.split(order, boundaries):
        score = x_w[block].T @ resid[block]
        meat += np.outer(score, score)
    cr_factor = (n_clusters / (n_clusters - 1)) * ((n_obs - 1) / (n_obs - k_absorbed))
    cov = cr_factor * xtx_inv @ meat @ xtx_inv
    se = np.sqrt(np.diag(cov))

    sst = float(y_w @ y_w)
    ssr = float(resid @ resid)
    r2 = 1.0 - ssr / sst if sst > 0 else 0.0

    return FeRegressionFit(
        outcome=outcome,
        regressors=names,
        beta=beta,
        se=se,
        tstats=beta / se,
        n_obs=n_obs,
        n_groups=n_groups,
        n_clusters=n_clusters,
        r2=r2,
        cr_factor=cr_factor,
    )


def assemble_panel(
    measures: MeasureTable,
    covariates: CovariatePanel,
    hhi: dict[tuple[str, int], HhiRow],
    dea_by_year: dict[int, DeaScores],
    cities: CityDirectory,
) -> PanelDataset:
    """Inner-join measures and covariates into the estimation panel.

    Court efficiency is state level and broadcast to every city in the
    state. Incomplete rows are dropped listwise; the first missing field
    (in canonical regressor order) decides the reported reason.
    """
    deleted: dict[str, int] = {}
    rows_cities: list[str] = []
    rows_years: list[int] = []
    rows_regions: list[str] = []
    outcome_cols: dict[str, list[float]] = {n: [] for n in OUTCOME_NAMES}
    regressor_cols: dict[str, list[float]] = {n: [] for n in REGRESSOR_NAMES}

    def drop(reason: str) -> None:
        deleted[reason] = deleted.get(reason, 0) + 1

    for city, year in sorted(measures.rows):
        mrow = measures.rows[(city, year)]
        crow = covariates.get(city, year)
        if crow is None:
            drop("missing covariates row")
            continue
        if crow.gdp_cents is None:
            drop("missing gdp")
            continue
        if crow.gdp_cents <= 0:
            drop("non-positive gdp")
            continue
        values: dict[str, float] = {"log_gdp": math.log(crow.gdp_cents / 100.0)}
        missing = None
        for name, value in (
            ("exports_over_gdp", crow.exports_over_gdp),
            ("credit_over_gdp", crow.credit_over_gdp),
            ("gini", crow.gini),
            ("doec", mrow.doec),
            ("does", mrow.does),
        ):
            if value is None:
                missing = name
                break
            values[name] = float(value)
        if missing is None:
            hrow = hhi.get((city, year))
            if hrow is None or hrow.hhi_bank_credit is None:
                missing = "hhi_bank"
            elif hrow.hhi_jobs is None:
                missing = "hhi_jobs"
            else:
                values["hhi_bank"] = hrow.hhi_bank_credit
                values["hhi_jobs"] = hrow.hhi_jobs
        if missing is None and crow.hdi is None:
            missing = "hdi"
        if missing is None:
            values["hdi"] = float(crow.hdi)
            year_scores = dea_by_year.get(year)
            state = cities.state_of(city)
            score = (
                year_scores.scores.get(state) if year_scores is not None else None
            )
            if score is None or score.efficiency is None:
                missing = "courts_efficiency"
            else:
                values["courts_efficiency"] = score.efficiency
        if missing is not None:
            drop(f"missing {missing}")
            continue

        rows_cities.append(city)
        rows_years.append(year)
        rows_regions.append(cities.region_of(city))
        outcome_cols["pagerank_down"].append(mrow.pagerank_down)
        outcome_cols["pagerank_up"].append(mrow.pagerank_up)
        outcome_cols["in_degree"].append(float(mrow.in_degree))
        outcome_cols["out_degree"].append(float(mrow.out_degree))
        outcome_cols["total_received"].append(mrow.total_received / 100.0)
        outcome_cols["total_paid"].append(mrow.total_paid / 100.0)
        for name in REGRESSOR_NAMES:
            regressor_cols[name].append(values[name])

    return PanelDataset(
        cities=rows_cities,
        years=rows_years,
        regions=rows_regions,
        outcomes={n: np.array(v) for n, v in outcome_cols.items()},
        regressors={n: np.array(v) for n, v in regressor_cols.items()},
        deleted=deleted,
    )


def _fmt(value: float) -> str:
    return format(value, ".12g")


def write_panel_csv(panel: PanelDataset, path: str | Path) -> Path:
    """Dump the estimation sample: keys, outcomes, then regressor columns.

    The regressor block includes the appended hhi_bank/hhi_jobs columns,
    so the file doubles as the assembled regression panel artifact.
    """
    path = Path(path)
    outcome_names = list(panel.outcomes)
    regressor_names = list(panel.regressors)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["city", "year", "region"] + outcome_names + regressor_names)
        for i in range(panel.n_rows):
            writer.writerow(
                [panel.cities[i], panel.years[i], panel.regions[i]]
                + [_fmt(panel.outcomes[n][i]) for n in outcome_names]
                + [_fmt(panel.regressors[n][i]) for n in regressor_names]
            )
    return path


def write_regression_csv(fit: FeRegressionFit, out_dir: str | Path) -> Path:
    path = Path(out_dir) / f"regression_{fit.outcome}.csv"
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["regressor", "beta", "se_cluster", "t_stat"])
        for j, name in enumerate(fit.regressors):
            writer.writerow([name, _fmt(fit.beta[j]), _fmt(fit.se[j]), _fmt(fit.tstats[j])])
    return path


def write_regression_meta(fits: list[FeRegressionFit], out_dir: str | Path) -> Path:
    path = Path(out_dir) / "regression_meta.csv"
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["outcome", "n_obs", "n_groups", "n_clusters", "r2"])
        for fit in fits:
            writer.writerow(
                [fit.outcome, fit.n_obs, fit.n_groups, fit.n_clusters, _fmt(fit.r2)]
            )
    return path
