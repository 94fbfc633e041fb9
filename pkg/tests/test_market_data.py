import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import direct_moments
from volblend.exceptions import DataError
from volblend.market_data import (
    PriceSeries,
    ReturnSeries,
    SplitSpec,
    describe,
    load_prices,
    log_returns,
    split,
    synthetic_dates,
)


def _write(tmp_path, text, name="prices.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestLoadPrices:
    def test_three_row_csv(self, tmp_path):
        path = _write(tmp_path, "date,close\n2020-01-01,100\n2020-01-02,110\n2020-01-03,99\n")
        prices = load_prices(path)
        assert len(prices) == 3
        assert prices.closes.tolist() == [100.0, 110.0, 99.0]

    def test_negative_close_rejected(self, tmp_path):
        path = _write(tmp_path, "date,close\n2020-01-01,100\n2020-01-02,-5\n")
        with pytest.raises(DataError, match="positive"):
            load_prices(path)

    def test_shuffled_dates_sorted(self, tmp_path):
        ordered = load_prices(
            _write(tmp_path, "date,close\n2020-01-01,1\n2020-01-02,2\n2020-01-03,3\n", "a.csv")
        )
        shuffled = load_prices(
            _write(tmp_path, "date,close\n2020-01-03,3\n2020-01-01,1\n2020-01-02,2\n", "b.csv")
        )
        assert ordered.dates == shuffled.dates
        assert np.array_equal(ordered.closes, shuffled.closes)

    def test_duplicate_dates_rejected(self, tmp_path):
        path = _write(tmp_path, "date,close\n2020-01-01,1\n2020-01-01,2\n")
        with pytest.raises(DataError, match="duplicate"):
            load_prices(path)

    def test_extra_columns_ignored(self, tmp_path):
        path = _write(tmp_path, "date,open,close\n2020-01-01,9,10\n2020-01-02,9,11\n")
        assert load_prices(path).closes.tolist() == [10.0, 11.0]

    def test_malformed_row(self, tmp_path):
        path = _write(tmp_path, "date,close\n2020-01-01,abc\n2020-01-02,1\n")
        with pytest.raises(DataError, match="bad close"):
            load_prices(path)

    def test_empty_file(self, tmp_path):
        with pytest.raises(DataError):
            load_prices(_write(tmp_path, ""))
        with pytest.raises(DataError, match="no data rows"):
            load_prices(_write(tmp_path, "date,close\n", "empty2.csv"))

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError, match="not found"):
            load_prices(tmp_path / "nope.csv")


class TestLogReturns:
    def test_e_ratios(self):
        prices = PriceSeries(synthetic_dates(3), np.array([1.0, math.e, math.e**2]))
        r = log_returns(prices)
        assert np.allclose(r.returns, [1.0, 1.0], atol=1e-15)

    def test_constant_prices(self):
        prices = PriceSeries(synthetic_dates(3), np.array([5.0, 5.0, 5.0]))
        assert np.array_equal(log_returns(prices).returns, [0.0, 0.0])

    def test_scalar_value(self):
        prices = PriceSeries(synthetic_dates(2), np.array([100.0, 110.0]))
        assert log_returns(prices).returns[0] == pytest.approx(0.0953102, abs=1e-7)

    def test_round_trip(self):
        rng = np.random.default_rng(5)
        x = rng.uniform(-0.2, 0.2, size=300)
        prices = PriceSeries(synthetic_dates(301), np.exp(np.concatenate([[0.0], np.cumsum(x)])))
        assert np.allclose(log_returns(prices).returns, x, atol=1e-12)


class TestDescribe:
    def test_symmetric_series_zero_skew(self):
        series = ReturnSeries(synthetic_dates(4), np.array([-1.0, 1.0, -1.0, 1.0]))
        assert describe(series).skewness == pytest.approx(0.0, abs=1e-15)

    def test_against_direct_summation(self):
        values = np.array([0.3, -1.2, 0.7, 2.4, -0.5, 0.0, 1.1, -2.2, 0.9, 0.4])
        stats = describe(ReturnSeries(synthetic_dates(10), values))
        expected = direct_moments(values)
        for field_name, value in expected.items():
            assert getattr(stats, field_name) == pytest.approx(value, rel=1e-12), field_name

    def test_permutation_invariant(self):
        rng = np.random.default_rng(11)
        values = rng.standard_normal(50)
        shuffled = values.copy()
        rng.shuffle(shuffled)
        a = describe(ReturnSeries(synthetic_dates(50), values))
        b = describe(ReturnSeries(synthetic_dates(50), shuffled))
        # order statistics are exactly order-free; summed moments only up to
        # floating-point reassociation
        assert (a.observations, a.median, a.maximum, a.minimum) == (
            b.observations, b.median, b.maximum, b.minimum,
        )
        for field_name in ("mean", "std_dev", "skewness", "kurtosis"):
            assert getattr(a, field_name) == pytest.approx(
                getattr(b, field_name), rel=1e-12, abs=1e-12
            ), field_name

    def test_too_short(self):
        with pytest.raises(DataError):
            describe(ReturnSeries(synthetic_dates(3), np.array([1.0, 2.0, 3.0])))

    def test_json_fields(self):
        values = np.array([0.1, -0.2, 0.3, -0.4, 0.5])
        payload = describe(ReturnSeries(synthetic_dates(5), values)).to_dict()
        assert sorted(payload) == [
            "kurtosis", "maximum", "mean", "median", "minimum",
            "observations", "skewness", "std_dev",
        ]


class TestSplit:
    def test_sh300_shape(self):
        series = ReturnSeries(synthetic_dates(2960), np.zeros(2960) + 0.01)
        train, val, test = split(series, SplitSpec(2456, 252, 252))
        assert (len(train), len(val), len(test)) == (2456, 252, 252)

    def test_singletons(self):
        series = ReturnSeries(synthetic_dates(10), np.arange(10, dtype=float))
        train, val, test = split(series, SplitSpec(8, 1, 1))
        assert val.returns.tolist() == [8.0]
        assert test.returns.tolist() == [9.0]

    def test_length_mismatch(self):
        series = ReturnSeries(synthetic_dates(10), np.zeros(10))
        with pytest.raises(DataError):
            split(series, SplitSpec(5, 2, 2))

    @given(st.integers(1, 30), st.integers(1, 30), st.integers(1, 30))
    @settings(max_examples=25, deadline=None)
    def test_concat_recovers_input(self, a, b, c):
        n = a + b + c
        values = np.linspace(-1.0, 1.0, n)
        series = ReturnSeries(synthetic_dates(n), values)
        train, val, test = split(series, SplitSpec(a, b, c))
        recombined = np.concatenate([train.returns, val.returns, test.returns])
        assert np.array_equal(recombined, values)
        assert train.dates + val.dates + test.dates == series.dates


class TestInvariants:
    def test_prices_must_increase(self):
        with pytest.raises(DataError):
            PriceSeries(tuple(reversed(synthetic_dates(3))), np.array([1.0, 2.0, 3.0]))

    def test_positive_split_lengths(self):
        with pytest.raises(DataError):
            SplitSpec(0, 1, 1)
