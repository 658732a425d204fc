"""CSV ingestion: transactions, firm/city directories, covariate panels.

All monetary amounts stay in integer cents until measure computation so
that aggregation over very large files is exact. Bad rows are rejected
one by one with a reason and line number; only structural problems
(unreadable file, bad header, duplicate panel keys) abort a load.
"""

from __future__ import annotations

import csv
import datetime as dt
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

from .errors import DataError

REGIONS = ("North", "Northeast", "Midwest", "Southeast", "South")

TRANSACTIONS_HEADER = ["date", "payer_firm", "payee_firm", "amount_cents"]
FIRMS_HEADER = ["firm_id", "city_id", "is_public_admin"]
CITIES_HEADER = ["city_id", "name", "state", "region", "is_capital"]
COVARIATES_HEADER = [
    "city_id", "year", "gdp_cents", "exports_over_gdp", "credit_over_gdp",
    "gini", "hdi", "backlog", "expenditures_cents", "completed_cases",
    "credit_agri_cents", "credit_manu_cents", "credit_serv_cents",
    "jobs_manu", "jobs_constr", "jobs_trade", "jobs_serv", "jobs_agri",
]


@dataclass(frozen=True, slots=True)
class YearRange:
    """Inclusive study window [start, end]."""

    start: int
    end: int

    def __post_init__(self) -> None:
        if self.start > self.end:
            raise DataError(f"empty year range {self.start}..{self.end}")

    def __contains__(self, year: int) -> bool:
        return self.start <= year <= self.end

    def __iter__(self) -> Iterator[int]:
        return iter(range(self.start, self.end + 1))

    def __len__(self) -> int:
        return self.end - self.start + 1

    @classmethod
    def parse(cls, text: str) -> "YearRange":
        """Parse 'A..B' (or a single year 'A') into a YearRange."""
        try:
            if ".." in text:
                a, b = text.split("..", 1)
                return cls(int(a), int(b))
            year = int(text)
            return cls(year, year)
        except ValueError as exc:
            raise DataError(f"bad year range {text!r}: expected A..B") from exc


@dataclass(frozen=True, slots=True)
class TransactionRecord:
    """One wire transfer: the payer is the customer, the payee the supplier."""

    date: dt.date
    payer_firm: str
    payee_firm: str
    amount: int  # integer cents, always > 0


@dataclass(frozen=True, slots=True)
class FirmInfo:
    city: str
    is_public_admin: bool


class FirmDirectory:
    """Maps firm id -> (city, public-administration flag).

    Unknown firms raise DataError; a silent default would corrupt the
    city aggregation downstream.
    """

    def __init__(self, firms: dict[str, FirmInfo]):
        self._firms = firms

    def __contains__(self, firm_id: str) -> bool:
        return firm_id in self._firms

    def __len__(self) -> int:
        return len(self._firms)

    def lookup(self, firm_id: str) -> FirmInfo:
        try:
            return self._firms[firm_id]
        except KeyError:
            raise DataError(f"unknown firm {firm_id!r}") from None

    def city_of(self, firm_id: str) -> str:
        return self.lookup(firm_id).city


@dataclass(frozen=True, slots=True)
class CityInfo:
    name: str
    state: str
    region: str
    is_capital: bool


class CityDirectory:
    """Maps city id -> (name, state, region, capital flag)."""

    def __init__(self, cities: dict[str, CityInfo]):
        self._cities = cities

    def __contains__(self, city_id: str) -> bool:
        return city_id in self._cities

    def __len__(self) -> int:
        return len(self._cities)

    def __iter__(self) -> Iterator[str]:
        return iter(self._cities)

    def lookup(self, city_id: str) -> CityInfo:
        try:
            return self._cities[city_id]
        except KeyError:
            raise DataError(f"unknown city {city_id!r}") from None

    def region_of(self, city_id: str) -> str:
        return self.lookup(city_id).region

    def state_of(self, city_id: str) -> str:
        return self.lookup(city_id).state


@dataclass(frozen=True, slots=True)
class CovariateRow:
    """One (city, year) row of exogenous covariates; None means absent."""

    gdp_cents: int | None = None
    exports_over_gdp: float | None = None
    credit_over_gdp: float | None = None
    gini: float | None = None
    hdi: float | None = None
    backlog: int | None = None
    expenditures_cents: int | None = None
    completed_cases: int | None = None
    credit_agri_cents: int | None = None
    credit_manu_cents: int | None = None
    credit_serv_cents: int | None = None
    jobs_manu: int | None = None
    jobs_constr: int | None = None
    jobs_trade: int | None = None
    jobs_serv: int | None = None
    jobs_agri: int | None = None


class CovariatePanel:
    """Validated covariate rows keyed by (city, year)."""

    def __init__(self, rows: dict[tuple[str, int], CovariateRow]):
        self.rows = rows

    def __len__(self) -> int:
        return len(self.rows)

    def get(self, city: str, year: int) -> CovariateRow | None:
        return self.rows.get((city, year))

    def years(self) -> list[int]:
        return sorted({year for _, year in self.rows})


@dataclass
class LoadReport:
    """Per-file ingestion outcome: accepted count plus tagged rejections."""

    accepted: int = 0
    rejections: list[tuple[int, str]] = field(default_factory=list)

    def reject(self, line: int, reason: str) -> None:
        self.rejections.append((line, reason))

    @property
    def total_rows(self) -> int:
        return self.accepted + len(self.rejections)

    def counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for _, reason in self.rejections:
            out[reason] = out.get(reason, 0) + 1
        return out


def _open_validated(path: str | Path, expected_header: list[str]):
    """Open a CSV, check the header, and return (file, reader)."""
    path = Path(path)
    try:
        fh = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    reader = csv.reader(fh)
    try:
        header = next(reader)
    except StopIteration:
        fh.close()
        raise DataError(f"{path}: missing header") from None
    except csv.Error as exc:
        fh.close()
        raise DataError(f"{path}: {exc}") from exc
    if header != expected_header:
        fh.close()
        raise DataError(
            f"{path}: bad header {header!r}, expected {expected_header!r}"
        )
    return fh, reader


def load_transactions(
    path: str | Path, firms: FirmDirectory, window: YearRange
) -> tuple[list[TransactionRecord], LoadReport]:
    """Load wire transfers, keeping rows that pass every record invariant.

    Rows are returned in file order. A row is rejected (never fatal) when
    it has the wrong column count, a malformed date or amount, a
    non-positive amount, identical payer and payee, an unknown firm, or a
    date outside the study window.
    """
    fh, reader = _open_validated(path, TRANSACTIONS_HEADER)
    records: list[TransactionRecord] = []
    report = LoadReport()
    with fh:
        for row in reader:
            line = reader.line_num
            if len(row) != 4:
                report.reject(line, "wrong column count")
                continue
            date_s, payer, payee, amount_s = row
            try:
                date = dt.date.fromisoformat(date_s)
            except ValueError:
                report.reject(line, "malformed date")
                continue
            try:
                amount = int(amount_s)
            except ValueError:
                report.reject(line, "non-numeric amount")
                continue
            if amount <= 0:
                report.reject(line, "non-positive amount")
                continue
            if payer == payee:
                report.reject(line, "self transfer")
                continue
            if payer not in firms or payee not in firms:
                report.reject(line, "unknown firm")
                continue
            if date.year not in window:
                report.reject(line, "date outside window")
                continue
            records.append(TransactionRecord(date, payer, payee, amount))
            report.accepted += 1
    return records, report


def filter_public_administration(
    txs: list[TransactionRecord], firms: FirmDirectory
) -> list[TransactionRecord]:
    """Drop transfers whose payee is a public-administration institution.

    Preserves order and is idempotent. Every firm must resolve in the
    directory (DataError otherwise).
    """
    return [tx for tx in txs if not firms.lookup(tx.payee_firm).is_public_admin]


def load_firms(path: str | Path, cities: CityDirectory | None = None) -> FirmDirectory:
    """Load the firm directory; duplicate ids or unknown cities are fatal."""
    fh, reader = _open_validated(path, FIRMS_HEADER)
    firms: dict[str, FirmInfo] = {}
    with fh:
        for row in reader:
            line = reader.line_num
            if len(row) != 3:
                raise DataError(f"{path}:{line}: wrong column count")
            firm_id, city_id, flag = row
            if firm_id in firms:
                raise DataError(f"{path}:{line}: duplicate firm {firm_id!r}")
            if flag not in ("0", "1"):
                raise DataError(f"{path}:{line}: is_public_admin must be 0 or 1")
            if cities is not None and city_id not in cities:
                raise DataError(f"{path}:{line}: unknown city {city_id!r}")
            firms[firm_id] = FirmInfo(city_id, flag == "1")
    return FirmDirectory(firms)


def load_cities(path: str | Path) -> CityDirectory:
    """Load the city directory; ids must be unique, regions one of five."""
    fh, reader = _open_validated(path, CITIES_HEADER)
    cities: dict[str, CityInfo] = {}
    with fh:
        for row in reader:
            line = reader.line_num
            if len(row) != 5:
                raise DataError(f"{path}:{line}: wrong column count")
            city_id, name, state, region, capital = row
            if city_id in cities:
                raise DataError(f"{path}:{line}: duplicate city {city_id!r}")
            if region not in REGIONS:
                raise DataError(
                    f"{path}:{line}: region {region!r} not one of {REGIONS}"
                )
            if capital not in ("0", "1"):
                raise DataError(f"{path}:{line}: is_capital must be 0 or 1")
            cities[city_id] = CityInfo(name, state, region, capital == "1")
    return CityDirectory(cities)


def _opt_int(text: str, *, minimum: int | None = None) -> int | None:
    if text == "":
        return None
    value = int(text)
    if minimum is not None and value < minimum:
        raise ValueError("below minimum")
    return value


def _opt_float(text: str, *, lo: float | None = None, hi: float | None = None) -> float | None:
    if text == "":
        return None
    value = float(text)
    if lo is not None and value < lo:
        raise ValueError("below range")
    if hi is not None and value > hi:
        raise ValueError("above range")
    return value


def load_covariates(
    path: str | Path, cities: CityDirectory
) -> tuple[CovariatePanel, LoadReport]:
    """Load the city-year covariate panel.

    Empty cells are recorded as absent (None), never as zero. Out-of-range
    values reject the row; a duplicate (city, year) key is fatal because it
    would make the panel join ambiguous.
    """
    fh, reader = _open_validated(path, COVARIATES_HEADER)
    rows: dict[tuple[str, int], CovariateRow] = {}
    report = LoadReport()
    with fh:
        for row in reader:
            line = reader.line_num
            if len(row) != len(COVARIATES_HEADER):
                report.reject(line, "wrong column count")
                continue
            city_id = row[0]
            if city_id not in cities:
                report.reject(line, "unknown city")
                continue
            try:
                year = int(row[1])
            except ValueError:
                report.reject(line, "malformed year")
                continue
            key = (city_id, year)
            if key in rows:
                raise DataError(f"{path}:{line}: duplicate (city, year) key {key}")
            try:
                gini = _opt_float(row[5], lo=0.0, hi=1.0)
            except ValueError:
                report.reject(line, "gini out of [0,1]")
                continue
            try:
                hdi = _opt_float(row[6], lo=0.0, hi=1.0)
            except ValueError:
                report.reject(line, "hdi out of [0,1]")
                continue
            try:
                exports = _opt_float(row[3], lo=0.0)
                credit = _opt_float(row[4], lo=0.0)
            except ValueError:
                report.reject(line, "negative ratio")
                continue
            try:
                money = [_opt_int(row[i], minimum=0) for i in (2, 8, 10, 11, 12)]
                counts = [_opt_int(row[i], minimum=0) for i in (7, 9, 13, 14, 15, 16, 17)]
            except ValueError:
                report.reject(line, "bad count or money field")
                continue
            rows[key] = CovariateRow(
                gdp_cents=money[0],
                exports_over_gdp=exports,
                credit_over_gdp=credit,
                gini=gini,
                hdi=hdi,
                backlog=counts[0],
                expenditures_cents=money[1],
                completed_cases=counts[1],
                credit_agri_cents=money[2],
                credit_manu_cents=money[3],
                credit_serv_cents=money[4],
                jobs_manu=counts[2],
                jobs_constr=counts[3],
                jobs_trade=counts[4],
                jobs_serv=counts[5],
                jobs_agri=counts[6],
            )
            report.accepted += 1
    return CovariatePanel(rows), report
