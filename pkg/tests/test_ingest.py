import datetime as dt

import pytest

from cityflows.errors import DataError
from cityflows.ingest import (
    FirmDirectory,
    FirmInfo,
    TransactionRecord,
    YearRange,
    filter_public_administration,
    load_cities,
    load_covariates,
    load_firms,
    load_transactions,
)

TX_HEADER = "date,payer_firm,payee_firm,amount_cents\n"
COV_HEADER = (
    "city_id,year,gdp_cents,exports_over_gdp,credit_over_gdp,gini,hdi,backlog,"
    "expenditures_cents,completed_cases,credit_agri_cents,credit_manu_cents,"
    "credit_serv_cents,jobs_manu,jobs_constr,jobs_trade,jobs_serv,jobs_agri\n"
)


@pytest.fixture
def firms():
    return FirmDirectory(
        {
            "F1": FirmInfo("A", False),
            "F2": FirmInfo("B", False),
            "F3": FirmInfo("B", True),
            "F4": FirmInfo("C", False),
        }
    )


@pytest.fixture
def cities_file(tmp_path):
    path = tmp_path / "cities.csv"
    path.write_text(
        "city_id,name,state,region,is_capital\n"
        "A,Alpha,S1,North,1\n"
        "B,Beta,S1,North,0\n"
        "C,Gamma,S2,South,1\n",
        encoding="utf-8",
    )
    return path


def write_tx(tmp_path, body):
    path = tmp_path / "transactions.csv"
    path.write_text(TX_HEADER + body, encoding="utf-8")
    return path


class TestLoadTransactions:
    def test_negative_amount_rejected(self, tmp_path, firms):
        path = write_tx(
            tmp_path,
            "2020-01-02,F1,F2,500\n2020-01-03,F2,F4,-7\n2020-01-04,F4,F1,30\n",
        )
        records, report = load_transactions(path, firms, YearRange(2020, 2020))
        assert len(records) == 2
        assert report.counts() == {"non-positive amount": 1}
        assert report.rejections == [(3, "non-positive amount")]

    def test_empty_file_with_header(self, tmp_path, firms):
        path = write_tx(tmp_path, "")
        records, report = load_transactions(path, firms, YearRange(2020, 2020))
        assert records == []
        assert report.total_rows == 0

    def test_rows_kept_in_file_order(self, tmp_path, firms):
        path = write_tx(tmp_path, "2020-02-01,F1,F2,10\n2020-01-01,F2,F1,20\n")
        records, _ = load_transactions(path, firms, YearRange(2020, 2020))
        assert [r.amount for r in records] == [10, 20]

    def test_rejection_reasons(self, tmp_path, firms):
        path = write_tx(
            tmp_path,
            "2020-01-01,F1,F2\n"           # wrong column count
            "not-a-date,F1,F2,10\n"        # malformed date
            "2020-01-01,F1,F2,ten\n"       # non-numeric amount
            "2020-01-01,F1,F2,0\n"         # non-positive amount
            "2020-01-01,F1,F1,10\n"        # self transfer
            "2020-01-01,FX,F2,10\n"        # unknown firm
            "2019-12-31,F1,F2,10\n",       # outside window
        )
        records, report = load_transactions(path, firms, YearRange(2020, 2021))
        assert records == []
        assert report.counts() == {
            "wrong column count": 1,
            "malformed date": 1,
            "non-numeric amount": 1,
            "non-positive amount": 1,
            "self transfer": 1,
            "unknown firm": 1,
            "date outside window": 1,
        }

    def test_accepted_plus_rejected_is_total(self, tmp_path, firms):
        body = "".join(
            f"2020-01-{(i % 28) + 1:02d},F1,F2,{i - 3}\n" for i in range(10)
        )
        path = write_tx(tmp_path, body)
        records, report = load_transactions(path, firms, YearRange(2020, 2020))
        assert report.accepted == len(records)
        assert report.total_rows == 10

    def test_unreadable_file_is_fatal(self, tmp_path, firms):
        with pytest.raises(DataError, match="cannot read"):
            load_transactions(tmp_path / "nope.csv", firms, YearRange(2020, 2020))

    def test_bad_header_is_fatal(self, tmp_path, firms):
        path = tmp_path / "t.csv"
        path.write_text("a,b,c,d\n", encoding="utf-8")
        with pytest.raises(DataError, match="bad header"):
            load_transactions(path, firms, YearRange(2020, 2020))

    def test_deterministic(self, tmp_path, firms):
        path = write_tx(tmp_path, "2020-01-02,F1,F2,500\n2020-01-03,F2,F4,77\n")
        first = load_transactions(path, firms, YearRange(2020, 2020))
        second = load_transactions(path, firms, YearRange(2020, 2020))
        assert first[0] == second[0]
        assert first[1].counts() == second[1].counts()


class TestFilterPublicAdministration:
    def tx(self, payer, payee):
        return TransactionRecord(dt.date(2020, 1, 1), payer, payee, 100)

    def test_all_public_payees(self, firms):
        txs = [self.tx("F1", "F3"), self.tx("F2", "F3")]
        assert filter_public_administration(txs, firms) == []

    def test_no_public_payees(self, firms):
        txs = [self.tx("F1", "F2"), self.tx("F2", "F4")]
        assert filter_public_administration(txs, firms) == txs

    def test_mixed_six_records(self, firms):
        txs = [
            self.tx("F1", "F2"),
            self.tx("F1", "F3"),  # public payee
            self.tx("F2", "F4"),
            self.tx("F3", "F1"),  # public payer is fine
            self.tx("F4", "F3"),  # public payee
            self.tx("F4", "F1"),
        ]
        kept = filter_public_administration(txs, firms)
        assert kept == [txs[0], txs[2], txs[3], txs[5]]

    def test_idempotent(self, firms):
        txs = [self.tx("F1", "F2"), self.tx("F1", "F3"), self.tx("F2", "F4")]
        once = filter_public_administration(txs, firms)
        assert filter_public_administration(once, firms) == once

    def test_unknown_firm_raises(self, firms):
        with pytest.raises(DataError, match="unknown firm"):
            filter_public_administration([self.tx("F1", "FX")], firms)


class TestDirectories:
    def test_load_cities(self, cities_file):
        cities = load_cities(cities_file)
        assert len(cities) == 3
        assert cities.lookup("A").region == "North"
        assert cities.lookup("C").is_capital

    def test_bad_region_fatal(self, tmp_path):
        path = tmp_path / "cities.csv"
        path.write_text(
            "city_id,name,state,region,is_capital\nA,Alpha,S1,Atlantis,0\n",
            encoding="utf-8",
        )
        with pytest.raises(DataError, match="Atlantis"):
            load_cities(path)

    def test_duplicate_city_fatal(self, tmp_path):
        path = tmp_path / "cities.csv"
        path.write_text(
            "city_id,name,state,region,is_capital\n"
            "A,Alpha,S1,North,0\nA,Alpha2,S1,North,0\n",
            encoding="utf-8",
        )
        with pytest.raises(DataError, match="duplicate city"):
            load_cities(path)

    def test_load_firms_checks_city(self, tmp_path, cities_file):
        cities = load_cities(cities_file)
        path = tmp_path / "firms.csv"
        path.write_text(
            "firm_id,city_id,is_public_admin\nF1,A,0\nF2,Z,1\n", encoding="utf-8"
        )
        with pytest.raises(DataError, match="unknown city"):
            load_firms(path, cities)

    def test_unknown_firm_lookup_raises(self):
        directory = FirmDirectory({"F1": FirmInfo("A", False)})
        with pytest.raises(DataError, match="unknown firm"):
            directory.lookup("F9")


class TestLoadCovariates:
    def cov_row(self, city="A", year=2020, gini="0.5", hdi="0.7"):
        return (
            f"{city},{year},1000000,0.01,0.02,{gini},{hdi},"
            "100,500000,80,1000,2000,3000,10,20,30,40,50\n"
        )

    def test_gini_out_of_range_rejected(self, tmp_path, cities_file):
        cities = load_cities(cities_file)
        path = tmp_path / "cov.csv"
        path.write_text(COV_HEADER + self.cov_row(gini="1.2"), encoding="utf-8")
        panel, report = load_covariates(path, cities)
        assert len(panel) == 0
        assert report.counts() == {"gini out of [0,1]": 1}

    def test_duplicate_key_fatal(self, tmp_path, cities_file):
        cities = load_cities(cities_file)
        path = tmp_path / "cov.csv"
        path.write_text(COV_HEADER + self.cov_row() + self.cov_row(), encoding="utf-8")
        with pytest.raises(DataError, match=r"\('A', 2020\)"):
            load_covariates(path, cities)

    def test_missing_fields_absent_not_zero(self, tmp_path, cities_file):
        cities = load_cities(cities_file)
        path = tmp_path / "cov.csv"
        path.write_text(
            COV_HEADER + "A,2020,,0.01,0.02,0.5,,100,500000,80,,,,,,,,\n",
            encoding="utf-8",
        )
        panel, report = load_covariates(path, cities)
        row = panel.get("A", 2020)
        assert report.accepted == 1
        assert row.gdp_cents is None
        assert row.hdi is None
        assert row.jobs_agri is None
        assert row.backlog == 100

    def test_unknown_city_rejected(self, tmp_path, cities_file):
        cities = load_cities(cities_file)
        path = tmp_path / "cov.csv"
        path.write_text(COV_HEADER + self.cov_row(city="Z"), encoding="utf-8")
        panel, report = load_covariates(path, cities)
        assert len(panel) == 0
        assert report.counts() == {"unknown city": 1}
