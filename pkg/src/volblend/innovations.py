"""Standardized innovation distributions: normal, Student-t, skewed Student-t, GED.

Every distribution is parametrized to zero mean and unit variance so that the
conditional variance carries the entire scale of the return process.  The
skewed Student-t follows Hansen's (1994) standardized parametrization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy import stats as sps
from scipy.special import gammaln

from .exceptions import ParameterError

KINDS = ("normal", "student_t", "skew_t", "ged")

# Letter codes used in model names, e.g. GARCH-N(1,1), ARCH-t(11).
SHORT_CODES = {"normal": "N", "student_t": "t", "skew_t": "st", "ged": "G"}

_LOG_2PI = math.log(2.0 * math.pi)


def _check_params(kind: str, shape, skew) -> None:
    if kind not in KINDS:
        raise ParameterError(f"unknown innovation kind {kind!r}, expected one of {KINDS}")
    if kind == "normal":
        return
    if shape is None or not np.isfinite(shape):
        raise ParameterError(f"{kind} requires a finite shape parameter")
    if kind in ("student_t", "skew_t") and shape <= 2.0:
        raise ParameterError(f"{kind} needs shape > 2 for unit-variance standardization")
    if kind == "ged" and shape <= 0.0:
        raise ParameterError("ged needs shape > 0")
    if kind == "skew_t":
        if skew is None or not np.isfinite(skew) or not -1.0 < skew < 1.0:
            raise ParameterError("skew_t needs skew in (-1, 1)")


def _skewt_consts(nu: float, lam: float) -> tuple[float, float, float]:
    """Hansen's (a, b, log c) constants for the standardized skew-t density."""
    log_c = gammaln((nu + 1.0) / 2.0) - gammaln(nu / 2.0) - 0.5 * math.log(math.pi * (nu - 2.0))
    a = 4.0 * lam * math.exp(log_c) * (nu - 2.0) / (nu - 1.0)
    b = math.sqrt(1.0 + 3.0 * lam * lam - a * a)
    return a, b, log_c


def log_density_values(kind: str, z, shape: float | None = None, skew: float | None = None):
    """Vectorized log-density of a standardized innovation. No parameter checks."""
    z = np.asarray(z, dtype=float)
    if kind == "normal":
        return -0.5 * (z * z + _LOG_2PI)
    if kind == "student_t":
        nu = shape
        const = gammaln((nu + 1.0) / 2.0) - gammaln(nu / 2.0) - 0.5 * math.log(math.pi * (nu - 2.0))
        return const - 0.5 * (nu + 1.0) * np.log1p(z * z / (nu - 2.0))
    if kind == "skew_t":
        nu, lam = shape, skew
        a, b, log_c = _skewt_consts(nu, lam)
        denom = 1.0 + np.sign(z + a / b) * lam
        core = (b * z + a) / denom
        return math.log(b) + log_c - 0.5 * (nu + 1.0) * np.log1p(core * core / (nu - 2.0))
    if kind == "ged":
        nu = shape
        log_lam = 0.5 * (-2.0 / nu * math.log(2.0) + gammaln(1.0 / nu) - gammaln(3.0 / nu))
        const = math.log(nu) - log_lam - (1.0 + 1.0 / nu) * math.log(2.0) - gammaln(1.0 / nu)
        return const - 0.5 * np.abs(z / math.exp(log_lam)) ** nu
    raise ParameterError(f"unknown innovation kind {kind!r}")


def _skewt_ppf(u: np.ndarray, nu: float, lam: float) -> np.ndarray:
    """Inverse CDF of the standardized skew-t, via classical t quantiles."""
    a, b, _ = _skewt_consts(nu, lam)
    u = np.asarray(u, dtype=float)
    cut = (1.0 - lam) / 2.0
    below = u < cut
    raw = np.empty_like(u)
    raw[below] = sps.t.ppf(u[below] / (1.0 - lam), nu)
    raw[~below] = sps.t.ppf(0.5 + (u[~below] - cut) / (1.0 + lam), nu)
    scale = math.sqrt((nu - 2.0) / nu)
    return (raw * (1.0 + np.sign(u - cut) * lam) * scale - a) / b


@dataclass(frozen=True)
class InnovationDist:
    """Value object naming a standardized innovation distribution.

    shape is the tail parameter (nu); skew is Hansen's lambda, skew_t only.
    """

    kind: str
    shape: float | None = None
    skew: float | None = None

    def __post_init__(self):
        _check_params(self.kind, self.shape, self.skew)

    @property
    def n_params(self) -> int:
        return {"normal": 0, "student_t": 1, "skew_t": 2, "ged": 1}[self.kind]

    @property
    def short_code(self) -> str:
        return SHORT_CODES[self.kind]

    def log_density(self, z):
        """Log-density at standardized residual z (scalar or array)."""
        out = log_density_values(self.kind, z, self.shape, self.skew)
        if np.isscalar(z):
            return float(out)
        return out

    def sample(self, n: int, seed: int) -> np.ndarray:
        """Deterministic unit-variance draws from an explicit seed."""
        if n < 0:
            raise ParameterError("sample size must be nonnegative")
        rng = np.random.default_rng(seed)
        if self.kind == "normal":
            return rng.standard_normal(n)
        if self.kind == "student_t":
            nu = self.shape
            return rng.standard_t(nu, size=n) * math.sqrt((nu - 2.0) / nu)
        if self.kind == "ged":
            nu = self.shape
            log_lam = 0.5 * (-2.0 / nu * math.log(2.0) + gammaln(1.0 / nu) - gammaln(3.0 / nu))
            gammas = rng.gamma(1.0 / nu, scale=1.0, size=n)
            signs = rng.integers(0, 2, size=n) * 2.0 - 1.0
            return signs * math.exp(log_lam) * (2.0 * gammas) ** (1.0 / nu)
        # skew_t: exact inverse-CDF transform of uniforms
        u = rng.random(n)
        return _skewt_ppf(u, self.shape, self.skew)

    def mean_abs(self) -> float:
        """E|z|, used by the optional centered EGARCH variant."""
        if self.kind == "normal":
            return math.sqrt(2.0 / math.pi)
        if self.kind == "student_t":
            nu = self.shape
            return (
                2.0
                * math.sqrt(nu - 2.0)
                * math.exp(gammaln((nu + 1.0) / 2.0) - gammaln(nu / 2.0))
                / (math.sqrt(math.pi) * (nu - 1.0))
            )
        if self.kind == "ged":
            nu = self.shape
            log_lam = 0.5 * (-2.0 / nu * math.log(2.0) + gammaln(1.0 / nu) - gammaln(3.0 / nu))
            return math.exp(
                log_lam + math.log(2.0) / nu + gammaln(2.0 / nu) - gammaln(1.0 / nu)
            )
        value, _ = integrate.quad(
            lambda z: abs(z) * math.exp(float(log_density_values(self.kind, z, self.shape, self.skew))),
            -np.inf,
            np.inf,
        )
        return value


def log_density(dist: InnovationDist, z):
    """Module-level alias for InnovationDist.log_density."""
    return dist.log_density(z)


def sample(dist: InnovationDist, n: int, seed: int) -> np.ndarray:
    """Module-level alias for InnovationDist.sample."""
    return dist.sample(n, seed)
