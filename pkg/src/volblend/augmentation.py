"""Efficiency-ratio augmentation of volatility forecasts.

The efficiency ratio at time t is the net change of the proxy series over a
window ending at t-1 divided by the sum of absolute one-step changes in that
window, so it lies in [-1, 1] and uses no information from time t onward.
Both the numerator and denominator are evaluated with exactly rounded
summation of the same one-step increments, which keeps |e_t| <= 1 in floating
point and makes monotone windows hit +-1 exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DataError
from .validation import as_float_vector


@dataclass(frozen=True)
class AugmentConfig:
    """window is the ER lookback M; sigma scales the trend adjustment.

    In proxy_std mode (default) the adjustment is sigma times the standard
    deviation of the in-sample proxy; raw mode adds sigma * e_t directly.
    """

    window: int = 15
    sigma: float = 0.1
    scale_mode: str = "proxy_std"

    def __post_init__(self):
        if self.window < 1:
            raise DataError("window must be >= 1")
        if not self.sigma >= 0.0:
            raise DataError("sigma must be >= 0")
        if self.scale_mode not in ("raw", "proxy_std"):
            raise DataError(f"unknown scale_mode {self.scale_mode!r}")


def effective_ratio(values, window: int, t: int) -> float:
    """ER at index t from values[t-1-window .. t-1]; flat windows return 0."""
    h = np.asarray(values, dtype=float)
    if window < 1:
        raise DataError("window must be >= 1")
    lo = t - 1 - window
    if lo < 0 or t - 1 >= h.shape[0]:
        raise DataError(
            f"ER at t={t} needs indices {lo}..{t - 1} inside the series of length {h.shape[0]}"
        )
    segment = h[lo : t]
    if not np.all(np.isfinite(segment)):
        raise DataError(f"ER window at t={t} contains non-finite values")
    steps = [segment[i + 1] - segment[i] for i in range(window)]
    denom = math.fsum(abs(s) for s in steps)
    if denom == 0.0:
        return 0.0
    return math.fsum(steps) / denom


def effective_ratio_series(values, window: int, start: int, stop: int) -> np.ndarray:
    """ER at each index in [start, stop)."""
    return np.array([effective_ratio(values, window, t) for t in range(start, stop)])


def augment(
    base: np.ndarray,
    proxy: np.ndarray,
    config: AugmentConfig,
    start: int,
    insample_len: int | None = None,
) -> np.ndarray:
    """Add the scaled trend term to a forecast series.

    base[i] is the forecast for global index start + i; proxy is the
    full-length realized-volatility series those indices refer to.  In
    proxy_std mode insample_len marks where out-of-sample begins, and the
    sigma multiplier is scaled by the in-sample proxy standard deviation.
    """
    base = as_float_vector(base, "base forecasts", min_len=0)
    proxy = np.asarray(proxy, dtype=float)
    if base.shape[0] and start - 1 - config.window < 0:
        raise DataError(
            f"forecasts starting at {start} need proxy history back to index "
            f"{start - 1 - config.window}"
        )
    sigma = config.sigma
    if config.scale_mode == "proxy_std":
        if insample_len is None:
            raise DataError("proxy_std mode needs insample_len")
        insample = proxy[:insample_len]
        insample = insample[np.isfinite(insample)]
        if insample.shape[0] < 2:
            raise DataError("not enough in-sample proxy values to scale sigma")
        sigma = sigma * float(np.std(insample, ddof=1))
    if sigma == 0.0:
        return base.copy()
    ratios = effective_ratio_series(proxy, config.window, start, start + base.shape[0])
    return base + sigma * ratios


def tune_augment(
    base_val: np.ndarray,
    targets_val: np.ndarray,
    proxy: np.ndarray,
    val_start: int,
    insample_len: int,
    windows,
    sigmas,
    scale_mode: str = "proxy_std",
) -> AugmentConfig:
    """Grid search (window, sigma) by validation RMSE; first strict improvement wins."""
    best: tuple[float, AugmentConfig] | None = None
    for window in windows:
        for sigma in sigmas:
            config = AugmentConfig(window=window, sigma=sigma, scale_mode=scale_mode)
            adjusted = augment(base_val, proxy, config, val_start, insample_len)
            rmse = float(np.sqrt(np.mean((adjusted - targets_val) ** 2)))
            if best is None or rmse < best[0]:
                best = (rmse, config)
    if best is None:
        raise DataError("empty augmentation grid")
    return best[1]
