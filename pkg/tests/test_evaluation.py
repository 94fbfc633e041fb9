import math

import numpy as np
import pytest

from oracles import dm_statistic
from volblend.evaluation import (
    DmRow,
    EvalReport,
    EvalRow,
    dm_test,
    mae,
    realized_vol_proxy,
    rmse,
)
from volblend.exceptions import DataError, NumericalError


class TestProxy:
    def test_constant_returns(self):
        proxy = realized_vol_proxy(np.full(30, 0.02))
        assert np.all(np.isnan(proxy[:4]))
        assert np.allclose(proxy[4:], 0.0004, rtol=1e-12)

    def test_window_arithmetic(self):
        proxy = realized_vol_proxy(np.array([1.0, 1.0, 1.0, 1.0, 1.0, 0.0]))
        assert proxy[-1] == pytest.approx(4.0 / 5.0, rel=1e-15)

    def test_brute_force_oracle(self):
        rng = np.random.default_rng(20)
        r = rng.standard_normal(20) * 0.01
        proxy = realized_vol_proxy(r)
        for t in range(4, 20):
            expected = sum(r[t - i] ** 2 for i in range(5)) / 5.0
            assert abs(proxy[t] - expected) < 1e-14

    def test_no_lookahead(self):
        rng = np.random.default_rng(21)
        r = rng.standard_normal(50)
        proxy = realized_vol_proxy(r)
        r2 = r.copy()
        r2[30:] = 5.0
        proxy2 = realized_vol_proxy(r2)
        assert np.array_equal(proxy[4:30], proxy2[4:30])
        assert np.all(np.isnan(proxy2[:4]))

    def test_too_short(self):
        with pytest.raises(DataError):
            realized_vol_proxy(np.ones(4))


class TestErrors:
    def test_perfect_prediction(self):
        y = np.array([1.0, 2.0, 3.0])
        assert rmse(y, y) == 0.0
        assert mae(y, y) == 0.0

    def test_constant_offset(self):
        y = np.zeros(10)
        assert rmse(y, y + 0.3) == pytest.approx(0.3, rel=1e-12)
        assert rmse(y, y - 0.3) == pytest.approx(0.3, rel=1e-12)

    def test_scalar_values(self):
        assert rmse([0.0, 0.0], [3.0, 4.0]) == pytest.approx(math.sqrt(12.5), rel=1e-12)
        assert mae([0.0, 0.0], [3.0, -4.0]) == 3.5

    def test_mae_le_rmse(self):
        rng = np.random.default_rng(22)
        for _ in range(50):
            y = rng.standard_normal(40)
            y_hat = rng.standard_normal(40)
            assert mae(y, y_hat) <= rmse(y, y_hat) + 1e-15

    def test_length_mismatch(self):
        with pytest.raises(DataError):
            rmse([1.0], [1.0, 2.0])
        with pytest.raises(DataError):
            mae([1.0], [1.0, 2.0])


class TestDmTest:
    def test_identical_forecasts_degenerate(self):
        y = np.arange(30, dtype=float)
        f = y + 0.5
        result = dm_test(y, f, f.copy())
        assert result.degenerate
        assert result.stat == 0.0
        assert result.p_value == 1.0

    def test_antisymmetry_bit_exact(self):
        rng = np.random.default_rng(23)
        y = rng.standard_normal(100)
        f = y + rng.standard_normal(100)
        g = y + rng.standard_normal(100)
        fwd = dm_test(y, f, g)
        rev = dm_test(y, g, f)
        assert fwd.stat == -rev.stat
        assert fwd.p_value == rev.p_value

    def test_27_point_oracle(self):
        rng = np.random.default_rng(24)
        y = rng.standard_normal(27)
        f = y + rng.standard_normal(27) * 0.5
        g = y + rng.standard_normal(27) * 0.8
        result = dm_test(y, f, g)
        assert result.n_lags == 3  # N = floor(27^(1/3)) + 1 = 4 lags 0..3
        expected = dm_statistic(y, f, g)
        assert result.stat == pytest.approx(expected, abs=1e-12)

    def test_bandwidth_fp_safe(self):
        # 64^(1/3) rounds below 4 in floating point; N must still be 5
        rng = np.random.default_rng(25)
        y = rng.standard_normal(64)
        f = y + rng.standard_normal(64)
        g = y + 2.0 * rng.standard_normal(64)
        assert dm_test(y, f, g).n_lags == 4

    def test_power_smoke(self):
        rejections = 0
        for seed in range(100):
            rng = np.random.default_rng(1000 + seed)
            y = rng.standard_normal(252)
            f = y + rng.standard_normal(252)
            g = y + 2.0 * rng.standard_normal(252)
            if abs(dm_test(y, f, g).stat) > 1.96:
                rejections += 1
        assert rejections >= 95

    def test_normal_reference_p_value(self):
        rng = np.random.default_rng(26)
        y = rng.standard_normal(100)
        f = y + rng.standard_normal(100)
        g = y + 1.5 * rng.standard_normal(100)
        result = dm_test(y, f, g)
        from scipy.stats import norm

        assert result.p_value == pytest.approx(2 * norm.sf(abs(result.stat)), abs=1e-15)
        assert 0.0 <= result.p_value <= 1.0

    def test_harvey_correction_shrinks_stat(self):
        rng = np.random.default_rng(27)
        y = rng.standard_normal(60)
        f = y + rng.standard_normal(60)
        g = y + 1.5 * rng.standard_normal(60)
        plain = dm_test(y, f, g)
        corrected = dm_test(y, f, g, harvey_correction=True)
        assert abs(corrected.stat) < abs(plain.stat)

    def test_too_short(self):
        with pytest.raises(DataError):
            dm_test(np.ones(5), np.ones(5), np.zeros(5))

    def test_negative_long_run_variance_raises(self):
        # period-3 loss differential [1, -1/2, -1/2]: lag-1 and lag-2
        # autocovariances are both about -eta0/2, driving the truncated
        # long-run variance negative
        d = np.tile([1.0, -0.5, -0.5], 4)
        y = np.zeros(12)
        f = np.maximum(d, 0.0)
        g = np.maximum(-d, 0.0)
        with pytest.raises(NumericalError, match="long-run variance"):
            dm_test(y, f, g)


class TestEvalReport:
    def test_serialization_round_trip(self):
        report = EvalReport(
            rows=(EvalRow("Eavesdrop", 2.279e-3, 1.484e-3), EvalRow("BARCH(5)", 2.5e-3, 1.9e-3)),
            dm_rows=(DmRow("BARCH(5)", 1.5, 0.13),),
            benchmark="SVR-GARCH",
        )
        payload = report.to_dict()
        assert payload["benchmark"] == "SVR-GARCH"
        assert payload["models"][0]["rmse"] == 2.279e-3
        csv_text = report.eval_csv_text()
        assert csv_text.splitlines()[0] == "model,rmse_x1e3,mae_x1e3"
        assert csv_text.splitlines()[1].startswith("Eavesdrop,2.279")
        assert report.dm_csv_text().splitlines()[1] == "BARCH(5),1.5,0.13"
        assert report.row("Eavesdrop").mae == 1.484e-3
