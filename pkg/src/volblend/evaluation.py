"""Realized-volatility proxy, RMSE/MAE scoring, and the Diebold-Mariano test."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .exceptions import DataError, NumericalError
from .validation import as_float_vector, check_equal_length


def realized_vol_proxy(returns) -> np.ndarray:
    """5-day rolling mean of squared returns; the first 4 entries are NaN warm-up."""
    r = as_float_vector(np.asarray(getattr(returns, "returns", returns), dtype=float), "returns")
    if r.shape[0] < 5:
        raise DataError("proxy needs at least 5 observations")
    squared = r * r
    window = np.convolve(squared, np.full(5, 0.2), mode="valid")
    out = np.full(r.shape[0], np.nan)
    out[4:] = window
    return out


def rmse(y, y_hat) -> float:
    """Root mean squared error."""
    y = as_float_vector(y, "y")
    y_hat = as_float_vector(y_hat, "y_hat")
    check_equal_length(y, y_hat, "y and y_hat")
    diff = y - y_hat
    return float(np.sqrt(np.mean(diff * diff)))


def mae(y, y_hat) -> float:
    """Mean absolute error."""
    y = as_float_vector(y, "y")
    y_hat = as_float_vector(y_hat, "y_hat")
    check_equal_length(y, y_hat, "y and y_hat")
    return float(np.mean(np.abs(y - y_hat)))


def _integer_cbrt(n: int) -> int:
    """Largest integer whose cube does not exceed n (fp-safe)."""
    root = int(np.floor(np.cbrt(n)))
    while (root + 1) ** 3 <= n:
        root += 1
    while root**3 > n:
        root -= 1
    return root


@dataclass(frozen=True)
class DmResult:
    stat: float
    p_value: float
    n_lags: int
    mean_diff: float
    degenerate: bool = False


def dm_test(y, f, g, harvey_correction: bool = False) -> DmResult:
    """Diebold-Mariano test on absolute-error loss differentials.

    d_i = |f_i - y_i| - |g_i - y_i|; the long-run variance uses lags up to
    N - 1 with N = floor(T^(1/3)) + 1; the statistic is referred to N(0,1)
    two-sided.  Identical forecasts return a degenerate zero statistic with
    p = 1; a negative long-run variance estimate raises NumericalError.
    """
    y = as_float_vector(y, "y")
    f = as_float_vector(f, "f")
    g = as_float_vector(g, "g")
    check_equal_length(y, f, "y and f")
    check_equal_length(y, g, "y and g")
    n = y.shape[0]
    if n < 8:
        raise DataError(f"DM test needs at least 8 observations, got {n}")
    n_lags = _integer_cbrt(n)  # N - 1
    d = np.abs(f - y) - np.abs(g - y)
    if np.all(d == 0.0):
        return DmResult(stat=0.0, p_value=1.0, n_lags=n_lags, mean_diff=0.0, degenerate=True)
    d_bar = float(np.mean(d))
    centered = d - d_bar
    etas = [float(centered[k:] @ centered[: n - k]) / n for k in range(n_lags + 1)]
    long_run_var = etas[0] + 2.0 * math.fsum(etas[1:])
    if long_run_var <= 0.0:
        raise NumericalError(
            "DM long-run variance estimate is not positive: "
            f"{long_run_var:.6e} (autocovariances {etas})"
        )
    stat = d_bar / math.sqrt(long_run_var / n)
    if harvey_correction:
        h = n_lags + 1
        stat *= math.sqrt((n + 1 - 2 * h + h * (h - 1) / n) / n)
    p_value = float(2.0 * norm.sf(abs(stat)))
    return DmResult(stat=float(stat), p_value=p_value, n_lags=n_lags, mean_diff=d_bar)


@dataclass(frozen=True)
class EvalRow:
    name: str
    rmse: float
    mae: float


@dataclass(frozen=True)
class DmRow:
    name: str
    dm_stat: float
    p_value: float


@dataclass(frozen=True)
class EvalReport:
    """Per-model scores plus DM comparisons against a named benchmark.

    DM rows use dm_test(y, benchmark, model), so a positive statistic means
    the model beats the benchmark on absolute-error loss.
    """

    rows: tuple[EvalRow, ...]
    dm_rows: tuple[DmRow, ...]
    benchmark: str

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))
        object.__setattr__(self, "dm_rows", tuple(self.dm_rows))

    def row(self, name: str) -> EvalRow:
        for row in self.rows:
            if row.name == name:
                return row
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "benchmark": self.benchmark,
            "models": [
                {"name": r.name, "rmse": r.rmse, "mae": r.mae} for r in self.rows
            ],
            "dm": [
                {"name": r.name, "dm_stat": r.dm_stat, "p_value": r.p_value}
                for r in self.dm_rows
            ],
        }

    def eval_csv_text(self) -> str:
        """Score table CSV: model name, RMSE and MAE in units of 1e-3."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["model", "rmse_x1e3", "mae_x1e3"])
        for row in self.rows:
            writer.writerow([row.name, repr(row.rmse * 1e3), repr(row.mae * 1e3)])
        return buf.getvalue()

    def dm_csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["model", "dm_stat", "p_value"])
        for row in self.dm_rows:
            writer.writerow([row.name, repr(row.dm_stat), repr(row.p_value)])
        return buf.getvalue()
