import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from volblend.arch import ModelParams, ModelSpec, simulate


@pytest.fixture(scope="session")
def garch_returns():
    """Returns simulated from GARCH(1,1)-normal (5e-6, 0.10, 0.85), T=3000."""
    spec = ModelSpec("GARCH", 1, 1, "normal")
    params = ModelParams(5e-6, (0.10,), (0.85,))
    return simulate(spec, params, 3000, seed=1234).returns


@pytest.fixture(scope="session")
def short_returns():
    """A fixed 20-point series for hand-check fixtures."""
    rng = np.random.default_rng(99)
    return rng.standard_normal(20) * 0.01


def two_regime_returns(n: int = 3000, block: int = 250) -> np.ndarray:
    """Interleaved blocks from two GARCH(1,1) parameter regimes."""
    calm = simulate(
        ModelSpec("GARCH", 1, 1, "normal"), ModelParams(2e-6, (0.05,), (0.90,)), n, seed=2001
    ).returns
    wild = simulate(
        ModelSpec("GARCH", 1, 1, "student_t"),
        ModelParams(2e-5, (0.20,), (0.70,), shape=6.0),
        n,
        seed=2002,
    ).returns
    out = np.empty(n)
    for start in range(0, n, block):
        source = calm if (start // block) % 2 == 0 else wild
        out[start : start + block] = source[start : start + block]
    return out


def write_price_csv(path, returns, start_price: float = 100.0):
    """Write a close-price CSV whose log returns equal `returns`."""
    from volblend.market_data import synthetic_dates

    prices = start_price * np.exp(np.concatenate([[0.0], np.cumsum(returns)]))
    dates = synthetic_dates(len(prices))
    with open(path, "w") as handle:
        handle.write("date,close\n")
        for date, close in zip(dates, prices):
            handle.write(f"{date.isoformat()},{float(close)!r}\n")
    return path
