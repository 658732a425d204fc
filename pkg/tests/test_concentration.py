import pytest

from cityflows.concentration import compute_hhi_rows, hhi_bank_credit, hhi_jobs
from cityflows.errors import DataError, NumericalError
from cityflows.ingest import CovariatePanel, CovariateRow


class TestHhiBankCredit:
    def test_single_sector(self):
        assert hhi_bank_credit(100, 0, 0) == 1.0

    def test_uniform(self):
        assert hhi_bank_credit(1, 1, 1) == pytest.approx(1 / 3)

    def test_hand_example(self):
        assert hhi_bank_credit(50, 30, 20) == pytest.approx(0.38)

    def test_zero_total_undefined(self):
        with pytest.raises(NumericalError):
            hhi_bank_credit(0, 0, 0)

    def test_negative_rejected(self):
        with pytest.raises(DataError):
            hhi_bank_credit(-1, 2, 3)


class TestHhiJobs:
    def test_single_sector(self):
        assert hhi_jobs(0, 0, 50, 0, 0) == 1.0

    def test_uniform(self):
        assert hhi_jobs(7, 7, 7, 7, 7) == pytest.approx(0.2)

    def test_hand_example(self):
        assert hhi_jobs(40, 10, 20, 20, 10) == pytest.approx(0.26)


class TestProperties:
    def test_scale_invariance(self, rng):
        for _ in range(100):
            shares = rng.uniform(0.0, 100.0, size=3)
            if shares.sum() == 0:
                continue
            scale = float(rng.uniform(0.01, 1000.0))
            assert hhi_bank_credit(*shares) == pytest.approx(
                hhi_bank_credit(*(shares * scale)), abs=1e-12
            )

    def test_bounds(self, rng):
        for _ in range(100):
            shares = rng.uniform(0.0, 50.0, size=5)
            if shares.sum() == 0:
                continue
            value = hhi_jobs(*shares)
            assert 1 / 5 - 1e-12 <= value <= 1.0 + 1e-12


class TestComputeRows:
    def test_missing_and_zero_total_stay_absent(self):
        panel = CovariatePanel(
            {
                ("A", 2020): CovariateRow(
                    credit_agri_cents=100, credit_manu_cents=0, credit_serv_cents=0,
                    jobs_manu=0, jobs_constr=0, jobs_trade=0, jobs_serv=0, jobs_agri=0,
                ),
                ("B", 2020): CovariateRow(credit_agri_cents=10),
            }
        )
        rows = compute_hhi_rows(panel)
        assert rows[("A", 2020)].hhi_bank_credit == 1.0
        assert rows[("A", 2020)].hhi_jobs is None  # zero total
        assert rows[("B", 2020)].hhi_bank_credit is None  # missing sectors
