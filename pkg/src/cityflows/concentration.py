"""Herfindahl-Hirschman concentration indices for credit and jobs.

A zero sector total makes the index undefined; those cells stay absent in
the panel (a zero HHI is impossible and would bias the regression).
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DataError, NumericalError
from .ingest import CovariatePanel


@dataclass(frozen=True, slots=True)
class HhiRow:
    city: str
    year: int
    hhi_bank_credit: float | None
    hhi_jobs: float | None


def _hhi(shares: tuple[float, ...]) -> float:
    if any(s < 0 for s in shares):
        raise DataError(f"negative sector value in {shares}")
    total = sum(shares)
    if total == 0:
        raise NumericalError("HHI undefined: zero sector total")
    return sum((s / total) ** 2 for s in shares)


def hhi_bank_credit(agri: float, manu: float, serv: float) -> float:
    """Sum of squared credit shares over the three lending sectors."""
    return _hhi((agri, manu, serv))


def hhi_jobs(manu: float, constr: float, trade: float, serv: float, agri: float) -> float:
    """Sum of squared formal-job shares over the five job sectors."""
    return _hhi((manu, constr, trade, serv, agri))


def compute_hhi_rows(panel: CovariatePanel) -> dict[tuple[str, int], HhiRow]:
    """Both HHIs for every (city, year); missing or zero-total cells stay None."""
    out: dict[tuple[str, int], HhiRow] = {}
    for (city, year), row in panel.rows.items():
        bank = None
        credit = (row.credit_agri_cents, row.credit_manu_cents, row.credit_serv_cents)
        if all(v is not None for v in credit):
            try:
                bank = hhi_bank_credit(*credit)
            except NumericalError:
                bank = None
        jobs = None
        counts = (row.jobs_manu, row.jobs_constr, row.jobs_trade,
                  row.jobs_serv, row.jobs_agri)
        if all(v is not None for v in counts):
            try:
                jobs = hhi_jobs(*counts)
            except NumericalError:
                jobs = None
        out[(city, year)] = HhiRow(city, year, bank, jobs)
    return out
