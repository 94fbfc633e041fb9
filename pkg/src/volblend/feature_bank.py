"""Model-prediction feature matrix, cosine correlations, and feature selection."""

from __future__ import annotations

import csv
import datetime as dt
import io
import warnings
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed

from .arch import FittedModel, ModelSpec, fit_mle, forecast_path
from .exceptions import DataError, NumericalError, ParameterError
from .market_data import ReturnSeries, SplitSpec


@dataclass(frozen=True)
class FeatureMatrix:
    """T x (N+1) matrix of per-model variance predictions plus a bias column.

    Column j < N holds model j's one-step-ahead conditional variance; the
    final column is the constant 1.  Rows align with the return dates.
    """

    values: np.ndarray = field(repr=False)
    column_labels: tuple[str, ...]
    dates: tuple[dt.date, ...]

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "column_labels", tuple(self.column_labels))
        object.__setattr__(self, "dates", tuple(self.dates))
        if values.ndim != 2:
            raise DataError("feature matrix must be two-dimensional")
        if values.shape[1] != len(self.column_labels):
            raise DataError("column label count does not match matrix width")
        if values.shape[0] != len(self.dates):
            raise DataError("row count does not match date index")
        if not np.allclose(values[:, -1], 1.0, rtol=0.0, atol=0.0):
            raise DataError("last column must be the constant bias of ones")
        predictions = values[:, :-1]
        if predictions.size and (not np.all(np.isfinite(predictions)) or np.any(predictions <= 0)):
            raise DataError("prediction columns must be finite and positive")

    @property
    def n_features(self) -> int:
        return self.values.shape[1] - 1

    def subset(self, indices) -> "FeatureMatrix":
        """New matrix keeping the given prediction columns (bias preserved)."""
        indices = np.asarray(indices, dtype=int)
        if indices.size and (indices.min() < 0 or indices.max() >= self.n_features):
            raise DataError("feature index out of range")
        cols = list(indices) + [self.values.shape[1] - 1]
        labels = tuple(self.column_labels[c] for c in cols)
        return FeatureMatrix(self.values[:, cols], labels, self.dates)

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["date", *self.column_labels])
        for date, row in zip(self.dates, self.values):
            writer.writerow([date.isoformat(), *(repr(float(v)) for v in row)])
        return buf.getvalue()


@dataclass(frozen=True)
class CorrelationMatrix:
    """Symmetric cosine-correlation matrix over prediction columns (bias excluded)."""

    values: np.ndarray = field(repr=False)
    labels: tuple[str, ...]

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "labels", tuple(self.labels))
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise DataError("correlation matrix must be square")
        if values.shape[0] != len(self.labels):
            raise DataError("label count does not match matrix size")

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["model", *self.labels])
        for label, row in zip(self.labels, self.values):
            writer.writerow([label, *(repr(float(v)) for v in row)])
        return buf.getvalue()


def default_bank() -> list[ModelSpec]:
    """The 90-spec default bank.

    ARCH p in 1..10 for each of the four innovations (40), GARCH/EGARCH/GJR
    with (p,q) in {(1,1),(2,1),(1,2),(2,2)} for each innovation (48), plus
    GARCH-N(3,3) and GJR-N(3,3).
    """
    innovations = ("normal", "student_t", "skew_t", "ged")
    bank: list[ModelSpec] = []
    for dist in innovations:
        for p in range(1, 11):
            bank.append(ModelSpec("ARCH", p, None, dist))
    for family in ("GARCH", "EGARCH", "GJR"):
        for dist in innovations:
            for p, q in ((1, 1), (2, 1), (1, 2), (2, 2)):
                bank.append(ModelSpec(family, p, q, dist))
    bank.append(ModelSpec("GARCH", 3, 3, "normal"))
    bank.append(ModelSpec("GJR", 3, 3, "normal"))
    return bank


def _fit_one(spec: ModelSpec, train: np.ndarray):
    try:
        return fit_mle(spec, train), None
    except (DataError, NumericalError, ParameterError) as exc:
        return None, f"{spec.name}: {exc}"


def build_feature_bank(
    returns: ReturnSeries,
    split_spec: SplitSpec,
    bank: list[ModelSpec],
    n_jobs: int = 1,
) -> tuple[FeatureMatrix, list[FittedModel]]:
    """Fit every bank spec on the training window and assemble predictions.

    In-sample rows carry the fitted recursion values; rows beyond the training
    window continue the same recursion with frozen parameters (one-step-ahead
    forecasts).  Specs that fail to fit, or produce non-finite or non-positive
    columns, are dropped with a warning and shrink the bank.
    """
    if not bank:
        raise DataError("bank is empty")
    if split_spec.total != len(returns):
        raise DataError("split lengths do not match the return series")
    full = returns.returns
    train = full[: split_spec.train_len]
    if n_jobs == 1:
        results = [_fit_one(spec, train) for spec in bank]
    else:
        results = Parallel(n_jobs=n_jobs)(delayed(_fit_one)(spec, train) for spec in bank)
    columns: list[np.ndarray] = []
    labels: list[str] = []
    models: list[FittedModel] = []
    dropped: list[str] = []
    for spec, (fitted, error) in zip(bank, results):
        if fitted is None:
            dropped.append(error)
            continue
        column = forecast_path(fitted, full, 0)
        if not np.all(np.isfinite(column)) or np.any(column <= 0):
            dropped.append(f"{spec.name}: forecast path not finite and positive")
            continue
        columns.append(column)
        labels.append(spec.name)
        models.append(fitted)
    if dropped:
        warnings.warn(f"dropped {len(dropped)} bank specs: {'; '.join(dropped)}")
    if not columns:
        raise NumericalError("every bank spec failed to fit")
    values = np.column_stack(columns + [np.ones(len(returns))])
    matrix = FeatureMatrix(values, tuple(labels) + ("bias",), returns.dates)
    return matrix, models


def cosine(x1, x2) -> float:
    """x1'x2 / (|x1| |x2|); raises on zero-norm input."""
    a = np.asarray(x1, dtype=float)
    b = np.asarray(x2, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise DataError("cosine needs two equal-length vectors")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise DataError("cosine is undefined for zero-norm vectors")
    return float(a @ b) / (na * nb)


def correlation_matrix(features, n_rows: int | None = None) -> CorrelationMatrix:
    """Pairwise cosine correlations of the prediction columns.

    Accepts a FeatureMatrix (bias column stripped) or a raw T x N array of
    prediction columns.  n_rows restricts the computation to the leading rows
    so selection can be based on training data only.
    """
    if isinstance(features, FeatureMatrix):
        values = features.values[:, :-1]
        labels = features.column_labels[:-1]
    else:
        values = np.asarray(features, dtype=float)
        if values.ndim != 2:
            raise DataError("feature array must be two-dimensional")
        labels = tuple(f"f{i}" for i in range(values.shape[1]))
    if values.shape[1] < 2:
        raise DataError("correlation matrix needs at least 2 features")
    if n_rows is not None:
        values = values[:n_rows]
    norms = np.linalg.norm(values, axis=0)
    if np.any(norms == 0.0):
        raise DataError("zero-norm feature column")
    unit = values / norms
    corr = unit.T @ unit
    corr = np.clip(corr, -1.0, 1.0)
    corr = np.triu(corr) + np.triu(corr, 1).T  # exact symmetry
    np.fill_diagonal(corr, 1.0)
    return CorrelationMatrix(corr, labels)


def select_features(corr: CorrelationMatrix, threshold: float = 0.9) -> np.ndarray:
    """Indices whose mean off-diagonal correlation is below the threshold."""
    values = corr.values
    n = values.shape[0]
    if n == 1:
        return np.array([0], dtype=int)
    row_means = (values.sum(axis=1) - np.diag(values)) / (n - 1)
    return np.flatnonzero(row_means < threshold)


def random_feature_subset(n_features: int, k: int, seed: int) -> np.ndarray:
    """Sorted random subset of k prediction columns, deterministic per seed."""
    if not 1 <= k <= n_features:
        raise DataError(f"subset size {k} outside [1, {n_features}]")
    rng = np.random.default_rng(seed)
    return np.sort(rng.choice(n_features, size=k, replace=False))
