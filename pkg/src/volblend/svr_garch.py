"""SVR-GARCH baseline (SVR mean and variance equations) and the Eavesdrop reference.

Stage 1 regresses r_t on r_{t-1} to produce mean-equation residuals; stage 2
maps [proxy_{t-1}, a_{t-1}^2] to the realized proxy at t.  Out-of-sample
predictions feed the realized proxy at t-1, never the model's own previous
output, which is precisely what makes the baseline prone to shadowing the
previous observation.  Hyperparameters are chosen on the validation split;
the fitted models stay trained on the training split only.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .evaluation import realized_vol_proxy
from .exceptions import ConvergenceError, DataError, ParameterError
from .market_data import ReturnSeries, SplitSpec
from .svr import KernelSvr


@dataclass(frozen=True)
class SvrGarchConfig:
    c_grid: tuple[float, ...] = (0.1, 1.0, 10.0, 100.0)
    eps_grid: tuple[float, ...] = (1e-5, 1e-4, 1e-3)
    gamma_grid: tuple[float, ...] = (0.1, 1.0, 10.0)
    tol: float = 1e-6
    max_iter: int = 1_000_000

    def __post_init__(self):
        for name in ("c_grid", "eps_grid", "gamma_grid"):
            values = tuple(getattr(self, name))
            object.__setattr__(self, name, values)
            if not values or any(v <= 0 for v in values):
                raise ParameterError(f"{name} must be non-empty with positive entries")

    def cells(self):
        for c in self.c_grid:
            for eps in self.eps_grid:
                for gamma in self.gamma_grid:
                    yield (c, eps, gamma)


@dataclass(frozen=True)
class SvrGarchResult:
    forecasts: np.ndarray = field(repr=False)  # full length, NaN before index 5
    mean_hyper: tuple[float, float, float]
    var_hyper: tuple[float, float, float]
    mean_model: KernelSvr
    var_model: KernelSvr
    residuals: np.ndarray = field(repr=False)

    @property
    def first_index(self) -> int:
        return 5


class _Standardizer:
    def __init__(self, X: np.ndarray):
        self.mean = X.mean(axis=0)
        scale = X.std(axis=0)
        scale[scale < 1e-12] = 1.0
        self.scale = scale

    def __call__(self, X: np.ndarray) -> np.ndarray:
        return (X - self.mean) / self.scale


def _grid_fit(X_train, y_train, X_val, y_val, config: SvrGarchConfig):
    """Fit every grid cell on train, pick the best validation MSE cell."""
    best = None
    failures = []
    for hyper in config.cells():
        c, eps, gamma = hyper
        model = KernelSvr(C=c, epsilon=eps, gamma=gamma, tol=config.tol, max_iter=config.max_iter)
        try:
            model.fit(X_train, y_train)
        except ConvergenceError as exc:
            failures.append(f"{hyper}: {exc}")
            continue
        val_mse = float(np.mean((model.predict(X_val) - y_val) ** 2))
        if best is None or val_mse < best[0]:
            best = (val_mse, hyper, model)
    if failures:
        warnings.warn(f"SVR grid skipped {len(failures)} cells: {'; '.join(failures)}")
    if best is None:
        raise ConvergenceError("every SVR grid cell failed to converge")
    return best[1], best[2]


def svr_garch_forecast(
    returns,
    split_spec: SplitSpec,
    config: SvrGarchConfig = SvrGarchConfig(),
) -> SvrGarchResult:
    """Two-stage SVR-GARCH with validation-split hyperparameter selection.

    Returns one-step-ahead variance forecasts for every index t >= 5 of the
    full series (NaN warm-up before that); slicing the test window out is the
    caller's job.
    """
    r = returns.returns if isinstance(returns, ReturnSeries) else np.asarray(returns, dtype=float)
    if split_spec.total != r.shape[0]:
        raise DataError("split lengths do not match the return series")
    train_len = split_spec.train_len
    val_end = split_spec.insample_len
    if train_len < 30:
        raise DataError("SVR-GARCH needs at least 30 training observations")

    # Stage 1: mean equation r_t = f(r_{t-1}) + a_t, samples indexed by t >= 1.
    X_mean = r[:-1, None]
    y_mean = r[1:]
    scale_mean = _Standardizer(X_mean[: train_len - 1])
    Xs_mean = scale_mean(X_mean)
    mean_hyper, mean_model = _grid_fit(
        Xs_mean[: train_len - 1],
        y_mean[: train_len - 1],
        Xs_mean[train_len - 1 : val_end - 1],
        y_mean[train_len - 1 : val_end - 1],
        config,
    )
    residuals = np.full(r.shape[0], np.nan)
    residuals[1:] = y_mean - mean_model.predict(Xs_mean)

    # Stage 2: variance equation proxy_t = g(proxy_{t-1}, a_{t-1}^2), t >= 5.
    proxy = realized_vol_proxy(r)
    first = 5
    idx = np.arange(first, r.shape[0])
    X_var = np.column_stack([proxy[idx - 1], residuals[idx - 1] ** 2])
    y_var = proxy[idx]
    train_rows = idx < train_len
    val_rows = (idx >= train_len) & (idx < val_end)
    if train_rows.sum() < 10:
        raise DataError("too few training rows for the SVR variance equation")
    scale_var = _Standardizer(X_var[train_rows])
    Xs_var = scale_var(X_var)
    var_hyper, var_model = _grid_fit(
        Xs_var[train_rows], y_var[train_rows], Xs_var[val_rows], y_var[val_rows], config
    )
    forecasts = np.full(r.shape[0], np.nan)
    forecasts[idx] = var_model.predict(Xs_var)
    return SvrGarchResult(
        forecasts=forecasts,
        mean_hyper=mean_hyper,
        var_hyper=var_hyper,
        mean_model=mean_model,
        var_model=var_model,
        residuals=residuals,
    )


def eavesdrop(proxy) -> np.ndarray:
    """Persistence forecast: predict the proxy at t by its value at t-1.

    Returns the forecasts for t = 1..len-1, i.e. proxy[:-1].
    """
    proxy = np.asarray(proxy, dtype=float)
    if proxy.ndim != 1 or proxy.shape[0] < 2:
        raise DataError("eavesdrop needs a 1-D series of length >= 2")
    return proxy[:-1].copy()
