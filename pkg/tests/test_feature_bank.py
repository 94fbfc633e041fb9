import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from volblend.arch import ModelSpec
from volblend.exceptions import DataError
from volblend.feature_bank import (
    CorrelationMatrix,
    build_feature_bank,
    correlation_matrix,
    cosine,
    default_bank,
    random_feature_subset,
    select_features,
)
from volblend.market_data import ReturnSeries, SplitSpec, synthetic_dates

SMALL_BANK = [
    ModelSpec("ARCH", 1, None, "normal"),
    ModelSpec("ARCH", 2, None, "normal"),
    ModelSpec("GARCH", 1, 1, "normal"),
    ModelSpec("EGARCH", 1, 1, "normal"),
]


@pytest.fixture(scope="module")
def bank_result(garch_returns):
    series = ReturnSeries(synthetic_dates(900), garch_returns[:900])
    split_spec = SplitSpec(700, 100, 100)
    return build_feature_bank(series, split_spec, SMALL_BANK)


class TestDefaultBank:
    def test_ninety_specs(self):
        bank = default_bank()
        assert len(bank) == 90
        assert len(set(bank)) == 90
        families = {s.family for s in bank}
        assert families == {"ARCH", "GARCH", "EGARCH", "GJR"}
        innovations = {s.innovation for s in bank}
        assert innovations == {"normal", "student_t", "skew_t", "ged"}


class TestBuildFeatureBank:
    def test_shape_and_bias(self, bank_result):
        matrix, models = bank_result
        assert matrix.values.shape == (900, len(SMALL_BANK) + 1)
        assert np.all(matrix.values[:, -1] == 1.0)
        assert matrix.column_labels[-1] == "bias"
        assert matrix.n_features == len(models) == len(SMALL_BANK)
        assert np.all(matrix.values[:, :-1] > 0)

    def test_single_spec_bank(self, garch_returns):
        series = ReturnSeries(synthetic_dates(700), garch_returns[:700])
        matrix, _ = build_feature_bank(series, SplitSpec(500, 100, 100), SMALL_BANK[:1])
        assert matrix.values.shape == (700, 2)

    def test_duplicate_specs_identical_columns(self, garch_returns):
        series = ReturnSeries(synthetic_dates(700), garch_returns[:700])
        matrix, _ = build_feature_bank(
            series, SplitSpec(500, 100, 100), [SMALL_BANK[2], SMALL_BANK[2]]
        )
        assert np.array_equal(matrix.values[:, 0], matrix.values[:, 1])

    def test_parallel_fit_matches_serial(self, garch_returns, bank_result):
        series = ReturnSeries(synthetic_dates(900), garch_returns[:900])
        parallel, _ = build_feature_bank(series, SplitSpec(700, 100, 100), SMALL_BANK, n_jobs=2)
        serial, _ = bank_result
        assert np.array_equal(parallel.values, serial.values)

    def test_failed_specs_dropped(self, garch_returns):
        # ARCH(15) has 16 parameters: needs > 160 observations to fit,
        # so a 150-point training window drops it but keeps ARCH(1)
        series = ReturnSeries(synthetic_dates(250), garch_returns[:250])
        bank = [ModelSpec("ARCH", 15, None, "normal"), ModelSpec("ARCH", 1, None, "normal")]
        with pytest.warns(UserWarning, match="dropped 1 bank specs"):
            matrix, models = build_feature_bank(series, SplitSpec(150, 50, 50), bank)
        assert matrix.n_features == 1
        assert models[0].spec.p == 1


class TestCosine:
    def test_self_cosine(self):
        x = np.array([0.3, -1.2, 5.0])
        assert cosine(x, x) == pytest.approx(1.0, abs=1e-15)

    def test_orthogonal(self):
        assert cosine([1.0, 0.0], [0.0, 1.0]) == 0.0

    def test_scalar_value(self):
        expected = 32.0 / (np.sqrt(14.0) * np.sqrt(77.0))
        assert cosine([1, 2, 3], [4, 5, 6]) == pytest.approx(expected, abs=1e-12)
        assert cosine([1, 2, 3], [4, 5, 6]) == pytest.approx(0.9746318, abs=1e-7)

    def test_zero_norm_rejected(self):
        with pytest.raises(DataError):
            cosine([0.0, 0.0], [1.0, 2.0])


class TestCorrelationMatrix:
    def test_proportional_columns(self):
        X = np.column_stack([np.ones(10), 3.0 * np.ones(10)])
        corr = correlation_matrix(X)
        assert corr.values[0, 1] == pytest.approx(1.0, abs=1e-15)

    def test_exact_transpose_symmetry(self, bank_result):
        matrix, _ = bank_result
        corr = correlation_matrix(matrix, n_rows=700)
        assert np.array_equal(corr.values, corr.values.T)
        assert np.all(np.diag(corr.values) == 1.0)
        assert np.all(np.abs(corr.values) <= 1.0)

    def test_against_elementwise_oracle(self):
        rng = np.random.default_rng(4)
        X = rng.uniform(0.5, 2.0, size=(40, 3))
        corr = correlation_matrix(X)
        for i in range(3):
            for j in range(3):
                assert corr.values[i, j] == pytest.approx(cosine(X[:, i], X[:, j]), abs=1e-12)

    def test_train_rows_only(self, bank_result):
        matrix, _ = bank_result
        full = correlation_matrix(matrix)
        train_only = correlation_matrix(matrix, n_rows=700)
        assert not np.array_equal(full.values, train_only.values)


class TestSelectFeatures:
    def test_all_high_correlation_empty(self):
        values = np.full((4, 4), 0.99)
        np.fill_diagonal(values, 1.0)
        corr = CorrelationMatrix(values, ("a", "b", "c", "d"))
        assert select_features(corr, 0.9).size == 0

    def test_identity_selects_all(self):
        corr = CorrelationMatrix(np.eye(5), tuple("abcde"))
        assert select_features(corr, 0.9).tolist() == [0, 1, 2, 3, 4]

    def test_threshold_boundary(self):
        # dyadic values so the row mean is exactly representable
        values = np.array([[1.0, 0.5], [0.5, 1.0]])
        corr = CorrelationMatrix(values, ("a", "b"))
        # row means are exactly 0.5: selection is strictly below the threshold
        assert select_features(corr, 0.5).size == 0
        assert select_features(corr, 0.51).size == 2

    def test_permutation_equivariance(self):
        rng = np.random.default_rng(8)
        X = rng.uniform(0.1, 1.0, size=(60, 6))
        corr = correlation_matrix(X)
        base = set(select_features(corr, 0.997).tolist())
        perm = rng.permutation(6)
        corr_p = correlation_matrix(X[:, perm])
        permuted = set(select_features(corr_p, 0.997).tolist())
        assert {int(perm[i]) for i in permuted} == base

    @given(st.floats(0.1, 40.0))
    @settings(max_examples=30, deadline=None)
    def test_scale_invariance(self, factor):
        rng = np.random.default_rng(12)
        X = rng.uniform(0.5, 2.0, size=(50, 4))
        base = select_features(correlation_matrix(X), 0.995).tolist()
        X2 = X.copy()
        X2[:, 2] *= factor
        scaled = select_features(correlation_matrix(X2), 0.995).tolist()
        assert base == scaled


class TestSubsets:
    def test_random_subset_deterministic(self):
        a = random_feature_subset(90, 10, seed=5)
        b = random_feature_subset(90, 10, seed=5)
        assert np.array_equal(a, b)
        assert np.array_equal(a, np.sort(a))
        assert len(set(a.tolist())) == 10

    def test_subset_bounds(self):
        with pytest.raises(DataError):
            random_feature_subset(10, 11, seed=0)

    def test_matrix_subset(self, bank_result):
        matrix, _ = bank_result
        sub = matrix.subset([0, 2])
        assert sub.values.shape == (900, 3)
        assert sub.column_labels == (
            matrix.column_labels[0], matrix.column_labels[2], "bias",
        )
        assert np.all(sub.values[:, -1] == 1.0)


class TestNoLookahead:
    def test_feature_columns_ignore_future(self, garch_returns):
        series_full = ReturnSeries(synthetic_dates(800), garch_returns[:800])
        tampered_values = garch_returns[:800].copy()
        tampered_values[700:] = 0.5  # rewrite the future
        series_tampered = ReturnSeries(synthetic_dates(800), tampered_values)
        split_spec = SplitSpec(600, 100, 100)
        m_full, _ = build_feature_bank(series_full, split_spec, SMALL_BANK[:2])
        m_tampered, _ = build_feature_bank(series_tampered, split_spec, SMALL_BANK[:2])
        # column value at t depends only on returns before t: identical up to 700
        assert np.array_equal(m_full.values[:701, :], m_tampered.values[:701, :])
