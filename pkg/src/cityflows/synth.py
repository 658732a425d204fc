"""Seeded synthetic stand-in for the confidential wire-transfer data.

Firms get heavy-tailed (Pareto) sizes and sit in cities whose weights are
themselves heavy-tailed, so a few hub cities concentrate most of the
economic mass. Each firm draws a persistent supplier portfolio with
probability proportional to counterparty size times a distance-decay
factor, then keeps paying into that portfolio year after year; payments
owed to firms killed by the recession are redirected to surviving firms
by size. This reproduces the qualitative regularities the analysis
expects: a sparse disassortative city network, centrality rising with
city GDP, and a recession that concentrates flows and deepens the
disassortativity.

Everything is a pure function of the config: one NumPy Generator, a fixed
call sequence, byte-identical files per seed.
"""

from __future__ import annotations

import csv
import datetime as dt
import math
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .econometrics import PanelDataset
from .errors import DataError
from .ingest import REGIONS, YearRange

CITIES_PER_STATE = 6
PUBLIC_ADMIN_SHARE = 0.02
MEAN_SUPPLIERS_PER_FIRM = 4.0
CITY_WEIGHT_SIGMA = 2.0

# Dirichlet concentration profiles per region: (agri, manu, serv) credit and
# (manu, constr, trade, serv, agri) jobs.
_CREDIT_PROFILES = {
    "North": (2.5, 1.0, 2.0),
    "Northeast": (2.0, 1.5, 2.0),
    "Midwest": (3.0, 1.0, 1.5),
    "Southeast": (1.0, 3.0, 3.0),
    "South": (1.5, 2.5, 2.0),
}
_JOBS_PROFILES = {
    "North": (1.0, 1.0, 2.0, 2.0, 3.0),
    "Northeast": (1.0, 1.5, 2.0, 2.0, 2.5),
    "Midwest": (1.5, 1.0, 2.0, 2.0, 3.0),
    "Southeast": (3.0, 1.5, 2.5, 3.0, 1.0),
    "South": (2.5, 1.5, 2.5, 2.5, 1.5),
}


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 42
    n_cities: int = 150
    n_firms: int = 5000
    years: YearRange = YearRange(2008, 2017)
    pareto_alpha: float = 1.5
    gravity_decay: float = 4.0
    intra_city_share: float = 0.3
    recession_year: int | None = 2013
    recession_kill_fraction: float = 0.0
    mean_tx_per_firm_year: float = 10.0

    def __post_init__(self) -> None:
        if self.n_cities < len(REGIONS):
            raise DataError(f"need at least {len(REGIONS)} cities, one per region")
        if self.n_firms < 2:
            raise DataError("need at least 2 firms")
        if self.pareto_alpha <= 1.0:
            raise DataError("pareto_alpha must exceed 1")
        if self.gravity_decay < 0.0:
            raise DataError("gravity_decay must be non-negative")
        if not 0.0 <= self.intra_city_share <= 1.0:
            raise DataError("intra_city_share must lie in [0,1]")
        if not 0.0 <= self.recession_kill_fraction <= 1.0:
            raise DataError("recession_kill_fraction must lie in [0,1]")
        if self.recession_year is not None and self.recession_year not in self.years:
            raise DataError("recession_year must fall inside the year range")
        if self.mean_tx_per_firm_year <= 0:
            raise DataError("mean_tx_per_firm_year must be positive")


def _city_ids(n: int) -> list[str]:
    return [f"C{i:04d}" for i in range(n)]


def _firm_ids(n: int) -> list[str]:
    return [f"F{i:05d}" for i in range(n)]


class _World:
    """Static geography and firm population derived from the config."""

    def __init__(self, config: SynthConfig, rng: np.random.Generator):
        n = config.n_cities
        self.city_ids = _city_ids(n)
        self.region_idx = np.arange(n) % len(REGIONS)
        self.regions = [REGIONS[r] for r in self.region_idx]

        # Each region occupies its own unit square; blocks are spaced so
        # inter-region trips cost more than intra-region ones.
        offset_x = 1.5 * self.region_idx
        self.coords = np.column_stack(
            [offset_x + rng.random(n), rng.random(n)]
        )
        diff = self.coords[:, None, :] - self.coords[None, :, :]
        self.distance = np.sqrt((diff * diff).sum(axis=2))

        self.city_weight = rng.lognormal(mean=0.0, sigma=CITY_WEIGHT_SIGMA, size=n)

        # States: chunks of neighbouring city ids within a region.
        self.states = [""] * n
        for r in range(len(REGIONS)):
            members = np.flatnonzero(self.region_idx == r)
            for pos, city in enumerate(members):
                self.states[city] = f"S{r}{pos // CITIES_PER_STATE:02d}"
        self.capital = [False] * n
        by_state: dict[str, list[int]] = {}
        for city, state in enumerate(self.states):
            by_state.setdefault(state, []).append(city)
        for members in by_state.values():
            top = max(members, key=lambda c: (self.city_weight[c], -c))
            self.capital[top] = True

        self.firm_ids = _firm_ids(config.n_firms)
        self.firm_size = 1.0 + rng.pareto(config.pareto_alpha, config.n_firms)
        self.firm_city = rng.choice(
            n, size=config.n_firms, p=self.city_weight / self.city_weight.sum()
        )
        n_public = int(round(PUBLIC_ADMIN_SHARE * config.n_firms))
        self.public = np.zeros(config.n_firms, dtype=bool)
        if n_public:
            self.public[rng.choice(config.n_firms, size=n_public, replace=False)] = True

        self.city_firms = [
            np.flatnonzero(self.firm_city == c) for c in range(n)
        ]
        self._build_portfolios(config, rng)

    def _build_portfolios(self, config: SynthConfig, rng: np.random.Generator) -> None:
        """Persistent supplier list per firm, size- and distance-weighted."""
        n_cities = config.n_cities
        n_firms = config.n_firms
        city_mass = np.array(
            [self.firm_size[firms].sum() for firms in self.city_firms]
        )
        gravity = city_mass[None, :] * np.exp(
            -config.gravity_decay * self.distance
        )
        np.fill_diagonal(gravity, 0.0)

        n_suppliers = 1 + rng.poisson(MEAN_SUPPLIERS_PER_FIRM - 1.0, size=n_firms)
        owner = np.repeat(np.arange(n_firms), n_suppliers)
        n_slots = len(owner)
        owner_city = self.firm_city[owner]
        firms_per_city = np.array([len(f) for f in self.city_firms])

        internal = rng.random(n_slots) < config.intra_city_share
        # A firm alone in its city has no local counterparty to buy from.
        internal &= firms_per_city[owner_city] >= 2

        supplier_city = np.empty(n_slots, dtype=np.int64)
        supplier_city[internal] = owner_city[internal]
        for c in range(n_cities):
            rows = np.flatnonzero(~internal & (owner_city == c))
            if len(rows) == 0:
                continue
            weights = gravity[c]
            total = weights.sum()
            if total <= 0.0:
                supplier_city[rows] = c
                internal[rows] = firms_per_city[c] >= 2
                continue
            supplier_city[rows] = rng.choice(
                n_cities, size=len(rows), p=weights / total
            )

        supplier = np.empty(n_slots, dtype=np.int64)
        for c in range(n_cities):
            members = self.city_firms[c]
            sizes = self.firm_size[members]
            rows = np.flatnonzero(~internal & (supplier_city == c))
            if len(rows):
                supplier[rows] = rng.choice(
                    members, size=len(rows), p=sizes / sizes.sum()
                )
            rows = np.flatnonzero(internal & (supplier_city == c))
            if len(rows):
                # Uniform pick among the other firms of the same city.
                positions = np.searchsorted(members, owner[rows])
                draw = rng.integers(0, len(members) - 1, size=len(rows))
                draw[draw >= positions] += 1
                supplier[rows] = members[draw]

        # Where even an external slot collapsed onto the owner (single-firm
        # city with no external mass) point it at the largest other firm.
        clash = np.flatnonzero(supplier == owner)
        if len(clash):
            fallback = int(np.argmax(self.firm_size))
            for slot in clash:
                pick = fallback if fallback != owner[slot] else int(
                    np.argsort(self.firm_size)[-2]
                )
                supplier[slot] = pick

        self.portfolio = supplier
        self.portfolio_indptr = np.zeros(n_firms + 1, dtype=np.int64)
        np.cumsum(n_suppliers, out=self.portfolio_indptr[1:])
        self.portfolio_sizes = n_suppliers

    def alive_mask(self, config: SynthConfig, year: int) -> np.ndarray:
        alive = np.ones(len(self.firm_size), dtype=bool)
        if (
            config.recession_year is not None
            and year >= config.recession_year
            and config.recession_kill_fraction > 0
        ):
            n_dead = int(round(config.recession_kill_fraction * len(self.firm_size)))
            doomed = np.argsort(self.firm_size, kind="stable")[:n_dead]
            alive[doomed] = False
        return alive


def _date_strings(year: int) -> list[str]:
    start = dt.date(year, 1, 1)
    n_days = (dt.date(year + 1, 1, 1) - start).days
    return [(start + dt.timedelta(days=d)).isoformat() for d in range(n_days)]


def _year_transactions(
    config: SynthConfig, world: _World, rng: np.random.Generator, year: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """(day_of_year, payer, payee, amount_cents) arrays for one year."""
    alive = world.alive_mask(config, year)
    counts = rng.poisson(config.mean_tx_per_firm_year, size=config.n_firms)
    counts[~alive] = 0
    payer = np.repeat(np.arange(config.n_firms), counts)
    m = len(payer)
    if m == 0:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty, empty, empty

    days = rng.integers(0, len(_date_strings(year)), size=m)
    amounts = np.maximum(
        1,
        np.round(
            world.firm_size[payer]
            * rng.lognormal(mean=math.log(3000.0), sigma=1.0, size=m)
        ),
    ).astype(np.int64)

    # Each payment goes to a uniformly drawn member of the payer's
    # persistent supplier portfolio.
    slot = world.portfolio_indptr[payer] + rng.integers(
        0, world.portfolio_sizes[payer]
    )
    payee = world.portfolio[slot].copy()

    # Payments owed to dead suppliers flow to surviving firms by size:
    # the recession concentrates volume on the biggest players.
    dead = ~alive[payee]
    if dead.any():
        survivors = np.flatnonzero(alive)
        weights = world.firm_size[survivors]
        weights = weights / weights.sum()
        payee[dead] = rng.choice(survivors, size=int(dead.sum()), p=weights)
        clash = np.flatnonzero(payee == payer)
        while len(clash):
            payee[clash] = rng.choice(survivors, size=len(clash), p=weights)
            clash = clash[payee[clash] == payer[clash]]

    return days, payer, payee, amounts


def _covariate_rows(
    config: SynthConfig, world: _World, rng: np.random.Generator,
    state_efficiency: dict[str, float], year: int,
) -> list[list[str]]:
    n = config.n_cities
    alive = world.alive_mask(config, year)
    alive_sizes = np.where(alive, world.firm_size, 0.0)
    mass = np.maximum(
        [alive_sizes[firms].sum() for firms in world.city_firms], 0.5
    )
    growth = 1.0 + 0.03 * (year - config.years.start)

    gdp = np.round(mass * growth * 1e7 * rng.lognormal(0.0, 0.05, n)).astype(np.int64)
    exports = rng.beta(1.2, 30.0, n)
    credit_ratio = rng.beta(1.5, 40.0, n)
    gini = np.clip(rng.normal(0.5, 0.08, n), 0.05, 0.95)
    log_mass = np.log(mass)
    hdi = np.clip(
        0.55 + 0.05 * (log_mass - log_mass.mean()) + rng.normal(0.0, 0.05, n),
        0.1, 0.98,
    )
    backlog = np.maximum(1, np.round(mass * rng.uniform(80.0, 120.0, n))).astype(np.int64)
    spend = np.round(backlog * rng.uniform(4000.0, 6000.0, n)).astype(np.int64)
    eff = np.array([state_efficiency[world.states[c]] for c in range(n)])
    completed = np.maximum(
        1, np.round(eff * 0.8 * backlog * rng.uniform(0.9, 1.1, n))
    ).astype(np.int64)

    total_credit = np.round(credit_ratio * gdp).astype(np.int64)
    total_jobs = np.maximum(50, np.round(mass * 40.0)).astype(np.int64)

    rows: list[list[str]] = []
    for c in range(n):
        region = world.regions[c]
        credit_split = rng.dirichlet(_CREDIT_PROFILES[region])
        jobs_split = rng.dirichlet(_JOBS_PROFILES[region])
        credit_cents = np.round(credit_split * total_credit[c]).astype(np.int64)
        jobs = np.round(jobs_split * total_jobs[c]).astype(np.int64)
        rows.append(
            [
                world.city_ids[c], str(year), str(int(gdp[c])),
                format(exports[c], ".6f"), format(credit_ratio[c], ".6f"),
                format(gini[c], ".6f"), format(hdi[c], ".6f"),
                str(int(backlog[c])), str(int(spend[c])), str(int(completed[c])),
                str(int(credit_cents[0])), str(int(credit_cents[1])),
                str(int(credit_cents[2])),
                str(int(jobs[0])), str(int(jobs[1])), str(int(jobs[2])),
                str(int(jobs[3])), str(int(jobs[4])),
            ]
        )
    return rows


def generate(config: SynthConfig, out_dir: str | Path) -> dict[str, Path]:
    """Write the four ingest CSVs plus synth_manifest.csv into out_dir."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(config.seed)
    world = _World(config, rng)

    state_efficiency = {
        state: float(value)
        for state, value in zip(
            sorted(set(world.states)),
            rng.uniform(0.45, 0.95, len(set(world.states))),
        )
    }

    paths = {
        "cities": out_dir / "cities.csv",
        "firms": out_dir / "firms.csv",
        "transactions": out_dir / "transactions.csv",
        "covariates": out_dir / "covariates.csv",
        "manifest": out_dir / "synth_manifest.csv",
    }

    with paths["cities"].open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["city_id", "name", "state", "region", "is_capital"])
        for c in range(config.n_cities):
            writer.writerow(
                [world.city_ids[c], f"City {c}", world.states[c],
                 world.regions[c], int(world.capital[c])]
            )

    with paths["firms"].open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["firm_id", "city_id", "is_public_admin"])
        for f in range(config.n_firms):
            writer.writerow(
                [world.firm_ids[f], world.city_ids[world.firm_city[f]],
                 int(world.public[f])]
            )

    ledger_total = 0
    n_transactions = 0
    with paths["transactions"].open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["date", "payer_firm", "payee_firm", "amount_cents"])
        for year in config.years:
            dates = _date_strings(year)
            days, payer, payee, amounts = _year_transactions(config, world, rng, year)
            for i in range(len(payer)):
                writer.writerow(
                    [dates[days[i]], world.firm_ids[payer[i]],
                     world.firm_ids[payee[i]], int(amounts[i])]
                )
            ledger_total += int(amounts.sum())
            n_transactions += len(payer)

    with paths["covariates"].open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["city_id", "year", "gdp_cents", "exports_over_gdp", "credit_over_gdp",
             "gini", "hdi", "backlog", "expenditures_cents", "completed_cases",
             "credit_agri_cents", "credit_manu_cents", "credit_serv_cents",
             "jobs_manu", "jobs_constr", "jobs_trade", "jobs_serv", "jobs_agri"]
        )
        for year in config.years:
            for row in _covariate_rows(config, world, rng, state_efficiency, year):
                writer.writerow(row)

    with paths["manifest"].open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["name", "value"])
        for spec_field in fields(config):
            value = getattr(config, spec_field.name)
            if isinstance(value, YearRange):
                value = f"{value.start}..{value.end}"
            writer.writerow([spec_field.name, value])
        writer.writerow(["n_transactions", n_transactions])
        writer.writerow(["ledger_total_cents", ledger_total])
        for state in sorted(state_efficiency):
            writer.writerow([f"state_efficiency_{state}",
                             format(state_efficiency[state], ".12g")])
    return paths


def known_beta_panel(
    seed: int,
    beta: list[float] | np.ndarray,
    noise_sd: float,
    n_cities: int = 500,
    years: YearRange = YearRange(2010, 2019),
    n_regions: int = 5,
) -> tuple[PanelDataset, dict]:
    """Panel with planted coefficients: the oracle for the regression fit.

    Region-by-year effects and regressors are drawn independently, so the
    within estimator must recover `beta` exactly when noise_sd is zero.
    """
    beta = np.asarray(beta, dtype=float)
    if not np.isfinite(beta).all():
        raise DataError("beta must be finite")
    rng = np.random.default_rng(seed)
    k = len(beta)
    n_years = len(years)
    year_list = list(years)
    region_names = [f"R{r}" for r in range(n_regions)]
    city_region = rng.integers(0, n_regions, size=n_cities)
    effects = rng.normal(0.0, 1.0, size=(n_regions, n_years))

    n_rows = n_cities * n_years
    cities = [f"C{c:04d}" for c in range(n_cities) for _ in range(n_years)]
    years_col = [year_list[t] for _ in range(n_cities) for t in range(n_years)]
    regions = [region_names[city_region[c]] for c in range(n_cities) for _ in range(n_years)]
    x = rng.normal(0.0, 1.0, size=(n_rows, k))
    alpha = np.array(
        [effects[city_region[c], t] for c in range(n_cities) for t in range(n_years)]
    )
    noise = rng.normal(0.0, 1.0, size=n_rows) * noise_sd
    y = alpha + x @ beta + noise

    panel = PanelDataset(
        cities=cities,
        years=years_col,
        regions=regions,
        outcomes={"y": y},
        regressors={f"x{j + 1}": x[:, j] for j in range(k)},
    )
    meta = {"seed": seed, "noise_sd": noise_sd,
            "beta": {f"x{j + 1}": float(beta[j]) for j in range(k)}}
    return panel, meta


def generate_known_beta_panel(
    path: str | Path,
    seed: int,
    beta: list[float] | np.ndarray,
    noise_sd: float,
    **dims,
) -> tuple[Path, Path]:
    """Write the planted-coefficient panel and its truth manifest."""
    panel, meta = known_beta_panel(seed, beta, noise_sd, **dims)
    path = Path(path)
    names = list(panel.regressors)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["city", "year", "region", "y"] + names)
        for i in range(panel.n_rows):
            writer.writerow(
                [panel.cities[i], panel.years[i], panel.regions[i],
                 format(panel.outcomes["y"][i], ".12g")]
                + [format(panel.regressors[n][i], ".12g") for n in names]
            )
    manifest = path.with_name(path.stem + "_manifest.csv")
    with manifest.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["name", "value"])
        writer.writerow(["seed", meta["seed"]])
        writer.writerow(["noise_sd", format(meta["noise_sd"], ".12g")])
        for name, value in meta["beta"].items():
            writer.writerow([f"beta_{name}", format(value, ".12g")])
    return path, manifest
