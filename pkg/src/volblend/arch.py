"""ARCH-family conditional-variance models: recursions, MLE, selection, forecasting.

Four families are supported. With a_t = r_t (zero mean equation):

  ARCH(p):     h_t = a0 + sum_{i<=p} alpha_i a_{t-i}^2
  GARCH(p,q):  h_t = a0 + sum_{i<=p} beta_i h_{t-i} + sum_{i<=q} alpha_i a_{t-i}^2
  EGARCH(p,q): ln h_t = a0 + sum beta_i ln h_{t-i} + sum alpha_i (|z_{t-i}| + gamma_i z_{t-i}),
               z = a/sqrt(h); the uncentered form is the default, a centered
               variant subtracting E|z| is available behind `egarch_centered`
  GJR(p,q):    h_t = a0 + sum (alpha_i + gamma_i S-_{t-i}) a_{t-i}^2 + sum beta_i h_{t-i}

p counts variance lags (betas) and q counts shock lags (alphas); ARCH uses p
for its shock lags and has no q.  Estimation is deterministic maximum
likelihood: Nelder-Mead over an unconstrained reparametrization, multi-start
from three fixed starting points.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import _kernels
from .exceptions import DataError, NumericalError, ParameterError
from .innovations import SHORT_CODES, InnovationDist, log_density_values
from .market_data import ReturnSeries, synthetic_dates

FAMILIES = ("ARCH", "GARCH", "EGARCH", "GJR")

_NM_OPTIONS = {"maxiter": 5000, "maxfev": 10000, "fatol": 1e-9, "xatol": 1e-8}


@dataclass(frozen=True)
class ModelSpec:
    """Family, lag orders, and innovation distribution of one model."""

    family: str
    p: int
    q: int | None = None
    innovation: str = "normal"

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ParameterError(f"unknown family {self.family!r}, expected one of {FAMILIES}")
        if self.p < 1:
            raise ParameterError("p must be >= 1")
        if self.family == "ARCH":
            if self.q is not None:
                raise ParameterError("ARCH takes no q order")
        elif self.q is None or self.q < 1:
            raise ParameterError(f"{self.family} needs q >= 1")
        if self.innovation not in SHORT_CODES:
            raise ParameterError(f"unknown innovation {self.innovation!r}")

    @property
    def name(self) -> str:
        code = SHORT_CODES[self.innovation]
        if self.family == "ARCH":
            return f"ARCH-{code}({self.p})"
        return f"{self.family}-{code}({self.p},{self.q})"

    @property
    def n_shock_lags(self) -> int:
        return self.p if self.family == "ARCH" else int(self.q)

    @property
    def n_variance_lags(self) -> int:
        return 0 if self.family == "ARCH" else self.p

    @property
    def n_params(self) -> int:
        k = 1 + self.n_shock_lags + self.n_variance_lags
        if self.family in ("EGARCH", "GJR"):
            k += self.n_shock_lags  # gammas
        return k + _n_shape_theta(self.innovation)

    def innovation_dist(self, shape: float | None, skew: float | None) -> InnovationDist:
        if self.innovation == "normal":
            return InnovationDist("normal")
        if self.innovation == "skew_t":
            return InnovationDist("skew_t", shape, skew)
        return InnovationDist(self.innovation, shape)


@dataclass(frozen=True)
class ModelParams:
    """Estimated coefficients; vector lengths must match the owning spec."""

    alpha0: float
    alphas: tuple[float, ...]
    betas: tuple[float, ...] = ()
    gammas: tuple[float, ...] = ()
    shape: float | None = None
    skew: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(float(v) for v in self.alphas))
        object.__setattr__(self, "betas", tuple(float(v) for v in self.betas))
        object.__setattr__(self, "gammas", tuple(float(v) for v in self.gammas))
        values = (self.alpha0, *self.alphas, *self.betas, *self.gammas)
        if not all(math.isfinite(v) for v in values):
            raise ParameterError("parameters must be finite")

    def to_dict(self) -> dict:
        return {
            "alpha0": self.alpha0,
            "alphas": list(self.alphas),
            "betas": list(self.betas),
            "gammas": list(self.gammas),
            "shape": self.shape,
            "skew": self.skew,
        }


@dataclass(frozen=True)
class FittedModel:
    spec: ModelSpec
    params: ModelParams
    loglik: float
    aic: float
    bic: float
    h_init: float
    in_sample_h: np.ndarray = field(repr=False)
    converged: bool
    n_obs: int

    @property
    def name(self) -> str:
        return self.spec.name

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "family": self.spec.family,
            "p": self.spec.p,
            "q": self.spec.q,
            "innovation": self.spec.innovation,
            "params": self.params.to_dict(),
            "loglik": self.loglik,
            "aic": self.aic,
            "bic": self.bic,
            "aic_per_obs": self.aic / self.n_obs,
            "bic_per_obs": self.bic / self.n_obs,
            "h_init": self.h_init,
            "converged": self.converged,
            "n_obs": self.n_obs,
        }


def _as_returns_array(returns) -> np.ndarray:
    if isinstance(returns, ReturnSeries):
        return returns.returns
    arr = np.asarray(returns, dtype=float)
    if arr.ndim != 1:
        raise DataError("returns must be one-dimensional")
    return arr


def _validate(spec: ModelSpec, params: ModelParams, h_init: float) -> None:
    if not math.isfinite(h_init) or h_init <= 0:
        raise ParameterError(f"h_init must be positive and finite, got {h_init}")
    if len(params.alphas) != spec.n_shock_lags:
        raise ParameterError(
            f"{spec.name}: expected {spec.n_shock_lags} alphas, got {len(params.alphas)}"
        )
    if len(params.betas) != spec.n_variance_lags:
        raise ParameterError(
            f"{spec.name}: expected {spec.n_variance_lags} betas, got {len(params.betas)}"
        )
    n_gammas = spec.n_shock_lags if spec.family in ("EGARCH", "GJR") else 0
    if len(params.gammas) != n_gammas:
        raise ParameterError(f"{spec.name}: expected {n_gammas} gammas, got {len(params.gammas)}")
    if spec.family in ("ARCH", "GARCH", "GJR"):
        if params.alpha0 <= 0:
            raise ParameterError(f"{spec.name}: alpha0 must be > 0")
        if any(v < 0 for v in params.alphas + params.betas + params.gammas):
            raise ParameterError(f"{spec.name}: coefficients must be nonnegative")
    # EGARCH coefficients are unconstrained in sign.


def _egarch_center(spec: ModelSpec, params: ModelParams, centered: bool) -> float:
    if not centered:
        return 0.0
    return spec.innovation_dist(params.shape, params.skew).mean_abs()


def variance_recursion(
    spec: ModelSpec,
    params: ModelParams,
    returns,
    h_init: float,
    egarch_centered: bool = False,
) -> np.ndarray:
    """Conditional-variance path h_1..h_T given shocks a_t = r_t.

    Pre-sample lags are seeded with h_init (squared shocks included); see
    _kernels for the sign convention of the seeded GJR/EGARCH terms.
    """
    a = _as_returns_array(returns)
    _validate(spec, params, h_init)
    alphas = np.asarray(params.alphas, dtype=float)
    betas = np.asarray(params.betas, dtype=float)
    gammas = np.asarray(params.gammas, dtype=float)
    if spec.family in ("ARCH", "GARCH"):
        return _kernels.garch_recursion(a, params.alpha0, alphas, betas, h_init)
    if spec.family == "GJR":
        return _kernels.gjr_recursion(a, params.alpha0, alphas, gammas, betas, h_init)
    center = _egarch_center(spec, params, egarch_centered)
    return _kernels.egarch_recursion(a, params.alpha0, alphas, gammas, betas, h_init, center)


def log_likelihood(
    spec: ModelSpec,
    params: ModelParams,
    returns,
    h_init: float,
    egarch_centered: bool = False,
) -> float:
    """Gaussian-change-of-variable likelihood: sum of log f(a_t/sqrt(h_t)) - ln(h_t)/2."""
    a = _as_returns_array(returns)
    h = variance_recursion(spec, params, a, h_init, egarch_centered)
    if not np.all(np.isfinite(h)) or np.any(h <= 0.0):
        raise NumericalError(f"{spec.name}: variance recursion produced non-finite or non-positive values")
    z = a / np.sqrt(h)
    ll = float(np.sum(log_density_values(spec.innovation, z, params.shape, params.skew))
               - 0.5 * np.sum(np.log(h)))
    if not math.isfinite(ll):
        raise NumericalError(f"{spec.name}: log-likelihood is not finite")
    return ll


# ---------------------------------------------------------------------------
# Unconstrained reparametrization used by the optimizer.
#
# Positive scale:        alpha0 = exp(theta)
# Coefficient simplex:   c_i = exp(psi_i) / (1 + sum_j exp(psi_j))
#                        (all c_i > 0 and sum c_i < 1; GJR gammas enter the
#                        simplex at half weight so alpha+beta+gamma/2 < 1)
# EGARCH:                alpha0/alphas/gammas raw, beta_i = tanh(psi_i)
# Tails:                 nu = 2 + exp(theta) (t families), nu = exp(theta) (GED)
# Skew:                  lambda = tanh(theta)
# ---------------------------------------------------------------------------


def _simplex_forward(psi: np.ndarray) -> np.ndarray:
    z = np.exp(np.clip(psi, -50.0, 50.0))
    return z / (1.0 + z.sum())


def _simplex_backward(c: np.ndarray) -> np.ndarray:
    slack = 1.0 - c.sum()
    return np.log(c / slack)


def _n_shape_theta(innovation: str) -> int:
    return {"normal": 0, "student_t": 1, "ged": 1, "skew_t": 2}[innovation]


def _unpack(theta: np.ndarray, spec: ModelSpec) -> ModelParams:
    q = spec.n_shock_lags
    p = spec.n_variance_lags
    shape = skew = None
    tail = theta[len(theta) - _n_shape_theta(spec.innovation):]
    if spec.innovation in ("student_t", "skew_t"):
        shape = 2.0 + math.exp(min(max(tail[0], -20.0), 20.0))
    elif spec.innovation == "ged":
        shape = math.exp(min(max(tail[0], -10.0), 10.0))
    if spec.innovation == "skew_t":
        skew = math.tanh(tail[1])
    if spec.family == "EGARCH":
        alpha0 = theta[0]
        alphas = theta[1 : 1 + q]
        gammas = theta[1 + q : 1 + 2 * q]
        betas = np.tanh(theta[1 + 2 * q : 1 + 2 * q + p])
        return ModelParams(float(alpha0), tuple(alphas), tuple(betas), tuple(gammas), shape, skew)
    alpha0 = math.exp(min(max(theta[0], -200.0), 200.0))
    if spec.family == "GJR":
        simplex = _simplex_forward(theta[1 : 1 + 2 * q + p])
        alphas = simplex[:q]
        gammas = 2.0 * simplex[q : 2 * q]
        betas = simplex[2 * q :]
        return ModelParams(alpha0, tuple(alphas), tuple(betas), tuple(gammas), shape, skew)
    simplex = _simplex_forward(theta[1 : 1 + q + p])
    return ModelParams(alpha0, tuple(simplex[:q]), tuple(simplex[q:]), (), shape, skew)


def _pack(params: ModelParams, spec: ModelSpec) -> np.ndarray:
    pieces: list[float] = []
    if spec.family == "EGARCH":
        pieces.append(params.alpha0)
        pieces.extend(params.alphas)
        pieces.extend(params.gammas)
        pieces.extend(np.arctanh(np.asarray(params.betas)))
    else:
        pieces.append(math.log(params.alpha0))
        if spec.family == "GJR":
            coefs = np.array(params.alphas + tuple(g / 2.0 for g in params.gammas) + params.betas)
        else:
            coefs = np.array(params.alphas + params.betas)
        pieces.extend(_simplex_backward(coefs))
    if spec.innovation in ("student_t", "skew_t"):
        pieces.append(math.log(params.shape - 2.0))
    elif spec.innovation == "ged":
        pieces.append(math.log(params.shape))
    if spec.innovation == "skew_t":
        pieces.append(math.atanh(params.skew))
    return np.array(pieces, dtype=float)


def _spread(total: float, k: int, front_heavy: bool) -> tuple[float, ...]:
    if k == 1:
        return (total,)
    if front_heavy:
        rest = 0.3 * total / (k - 1)
        return (0.7 * total,) + (rest,) * (k - 1)
    return (total / k,) * k


def _shape_start(innovation: str) -> tuple[float | None, float | None]:
    if innovation == "normal":
        return None, None
    if innovation == "ged":
        return 1.5, None
    if innovation == "student_t":
        return 8.0, None
    return 8.0, 0.0


def starting_points(spec: ModelSpec, sample_var: float) -> list[ModelParams]:
    """Three documented deterministic starting points for the optimizer."""
    q = spec.n_shock_lags
    p = spec.n_variance_lags
    shape, skew = _shape_start(spec.innovation)
    starts: list[ModelParams] = []
    if spec.family == "ARCH":
        for total, heavy in ((0.30, True), (0.60, False), (0.90, False)):
            starts.append(
                ModelParams(sample_var * (1.0 - total), _spread(total, q, heavy), (), (), shape, skew)
            )
        return starts
    if spec.family == "EGARCH":
        for beta_total, heavy in ((0.90, True), (0.60, False), (0.10, False)):
            betas = _spread(beta_total, p, heavy)
            alphas = (0.1 / q,) * q
            gammas = (0.0,) * q
            alpha0 = (1.0 - beta_total) * math.log(sample_var)
            starts.append(ModelParams(alpha0, alphas, betas, gammas, shape, skew))
        return starts
    for a_total, b_total, heavy in ((0.10, 0.80, True), (0.30, 0.60, False), (0.05, 0.10, False)):
        alphas = _spread(a_total, q, heavy)
        betas = _spread(b_total, p, heavy)
        gammas = (0.05 / q,) * q if spec.family == "GJR" else ()
        alpha0 = sample_var * (1.0 - a_total - b_total)
        starts.append(ModelParams(alpha0, alphas, betas, gammas, shape, skew))
    return starts


def _make_neg_loglik(spec: ModelSpec, a: np.ndarray, h_init: float, egarch_centered: bool):
    family = spec.family
    kind = spec.innovation

    def neg_loglik(theta: np.ndarray) -> float:
        params = _unpack(theta, spec)
        alphas = np.asarray(params.alphas)
        betas = np.asarray(params.betas)
        gammas = np.asarray(params.gammas)
        with np.errstate(all="ignore"):
            if family in ("ARCH", "GARCH"):
                h = _kernels.garch_recursion(a, params.alpha0, alphas, betas, h_init)
            elif family == "GJR":
                h = _kernels.gjr_recursion(a, params.alpha0, alphas, gammas, betas, h_init)
            else:
                center = _egarch_center(spec, params, egarch_centered)
                h = _kernels.egarch_recursion(a, params.alpha0, alphas, gammas, betas, h_init, center)
            if not np.all(np.isfinite(h)) or np.any(h <= 0.0):
                return np.inf
            z = a / np.sqrt(h)
            ll = np.sum(log_density_values(kind, z, params.shape, params.skew)) - 0.5 * np.sum(np.log(h))
        if not np.isfinite(ll):
            return np.inf
        return -float(ll)

    return neg_loglik


def fit_mle(
    spec: ModelSpec,
    returns,
    h_init: float | None = None,
    egarch_centered: bool = False,
) -> FittedModel:
    """Deterministic maximum-likelihood fit.

    Nelder-Mead over the unconstrained reparametrization, started from three
    fixed points, with one refinement restart from the best optimum.  When
    the iteration cap is hit, the best parameters so far are returned with
    converged=False rather than raising.
    """
    a = _as_returns_array(returns)
    k = spec.n_params
    if a.shape[0] <= 10 * k:
        raise DataError(
            f"{spec.name}: needs more than {10 * k} observations, got {a.shape[0]}"
        )
    if h_init is None:
        h_init = float(np.var(a, ddof=1))
    if h_init <= 0:
        raise DataError(f"{spec.name}: sample variance is zero, cannot seed the recursion")
    neg_loglik = _make_neg_loglik(spec, a, h_init, egarch_centered)
    sample_var = float(np.var(a, ddof=1))
    best = None
    for start in starting_points(spec, sample_var):
        theta0 = _pack(start, spec)
        res = minimize(neg_loglik, theta0, method="Nelder-Mead", options=_NM_OPTIONS)
        if best is None or res.fun < best.fun:
            best = res
    refined = minimize(neg_loglik, best.x, method="Nelder-Mead", options=_NM_OPTIONS)
    if refined.fun <= best.fun:
        best = refined
    params = _unpack(best.x, spec)
    loglik = -float(best.fun)
    if not math.isfinite(loglik):
        raise NumericalError(f"{spec.name}: optimizer failed to find a finite likelihood")
    h = variance_recursion(spec, params, a, h_init, egarch_centered)
    n_obs = int(a.shape[0])
    return FittedModel(
        spec=spec,
        params=params,
        loglik=loglik,
        aic=2.0 * k - 2.0 * loglik,
        bic=k * math.log(n_obs) - 2.0 * loglik,
        h_init=h_init,
        in_sample_h=h,
        converged=bool(refined.success),
        n_obs=n_obs,
    )


def information_criteria(fitted: FittedModel) -> tuple[float, float, float]:
    """(log-likelihood, AIC, BIC) with AIC = 2k - 2LL, BIC = k ln(T) - 2LL."""
    return fitted.loglik, fitted.aic, fitted.bic


def default_order_grid(family: str) -> list:
    if family == "ARCH":
        return list(range(1, 16))
    return [(p, q) for p in (1, 2, 3) for q in (1, 2, 3)]


def select_order(
    family: str,
    innovation: str,
    grid,
    returns,
    h_init: float | None = None,
    egarch_centered: bool = False,
) -> FittedModel:
    """Fit every order in the grid, return the smallest-BIC model.

    Ties break toward smaller p+q, then smaller p.  Failed fits are skipped
    with a warning; if every order fails, NumericalError is raised.
    """
    grid = list(grid)
    if not grid:
        raise ParameterError("order grid is empty")
    candidates: list[tuple[float, int, int, FittedModel]] = []
    failures: list[str] = []
    for order in grid:
        if family == "ARCH":
            spec = ModelSpec(family, int(order), None, innovation)
            total, p = spec.p, spec.p
        else:
            p, q = order
            spec = ModelSpec(family, int(p), int(q), innovation)
            total = spec.p + spec.q
        try:
            fitted = fit_mle(spec, returns, h_init=h_init, egarch_centered=egarch_centered)
        except (DataError, NumericalError, ParameterError) as exc:
            failures.append(f"{spec.name}: {exc}")
            continue
        candidates.append((fitted.bic, total, spec.p, fitted))
    if failures:
        warnings.warn(f"select_order skipped {len(failures)} orders: {'; '.join(failures)}")
    if not candidates:
        raise NumericalError(f"every {family}-{innovation} order in the grid failed to fit")
    candidates.sort(key=lambda item: (item[0], item[1], item[2]))
    return candidates[0][3]


def forecast_path(fitted: FittedModel, full_returns, start: int) -> np.ndarray:
    """One-step-ahead variances for t >= start with frozen parameters.

    The recursion is run over the full return history with the fitted h_init,
    so h_t only uses information through t-1; the slice beyond the training
    window is the out-of-sample forecast path.
    """
    a = _as_returns_array(full_returns)
    if not 0 <= start <= a.shape[0]:
        raise DataError(f"start index {start} outside [0, {a.shape[0]}]")
    if start == a.shape[0]:
        return np.empty(0)
    h = variance_recursion(fitted.spec, fitted.params, a, fitted.h_init)
    return h[start:]


def _persistence(spec: ModelSpec, params: ModelParams) -> float:
    base = sum(params.alphas) + sum(params.betas)
    if spec.family == "GJR":
        base += 0.5 * sum(params.gammas)
    return base


def simulate(
    spec: ModelSpec,
    params: ModelParams,
    n: int,
    seed: int,
    burn: int = 500,
) -> ReturnSeries:
    """Simulate r_t = sqrt(h_t) eps_t; deterministic per seed, burn-in discarded."""
    _validate(spec, params, 1.0)
    if n < 1:
        raise ParameterError("n must be >= 1")
    alphas = np.asarray(params.alphas)
    betas = np.asarray(params.betas)
    gammas = np.asarray(params.gammas)
    dist = spec.innovation_dist(params.shape, params.skew)
    eps = dist.sample(n + burn, seed)
    if spec.family == "EGARCH":
        beta_sum = float(np.sum(betas))
        if abs(1.0 - beta_sum) < 1e-8:
            raise ParameterError("EGARCH log-variance AR is non-stationary (sum of betas is 1)")
        log_h0 = params.alpha0 / (1.0 - beta_sum)
        a, _ = _kernels.egarch_simulate(eps, params.alpha0, alphas, gammas, betas, log_h0, 0.0)
    else:
        persistence = _persistence(spec, params)
        if persistence >= 1.0:
            raise ParameterError(
                f"{spec.name}: non-stationary parameters (persistence {persistence:.4f} >= 1)"
            )
        h0 = params.alpha0 / (1.0 - persistence)
        if spec.family == "GJR":
            a, _ = _kernels.gjr_simulate(eps, params.alpha0, alphas, gammas, betas, h0)
        else:
            a, _ = _kernels.garch_simulate(eps, params.alpha0, alphas, betas, h0)
    values = a[burn:]
    return ReturnSeries(dates=synthetic_dates(n), returns=values)
