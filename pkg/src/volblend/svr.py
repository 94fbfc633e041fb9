"""Epsilon-insensitive support vector regression with an RBF kernel.

The dual is solved in the collapsed variables beta_i = alpha_i - alpha_i*
(box [-C, C], sum zero) by pairwise coordinate descent with deterministic
maximal-violating-pair selection; see _kernels.svr_smo.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from ._kernels import svr_smo
from .exceptions import ConvergenceError, ParameterError
from .validation import as_float_matrix, as_float_vector, check_equal_length, check_fitted


def rbf_kernel(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    """exp(-gamma * ||a - b||^2) for all row pairs."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    sq = (
        np.sum(A * A, axis=1)[:, None]
        + np.sum(B * B, axis=1)[None, :]
        - 2.0 * (A @ B.T)
    )
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-gamma * sq)


class KernelSvr(BaseEstimator):
    """RBF-kernel epsilon-SVR solved to a KKT tolerance.

    Attributes after fit: dual_coef_ (beta, one per training point),
    intercept_, support_ (indices with nonzero beta), n_iter_.
    """

    def __init__(
        self,
        C: float = 1.0,
        epsilon: float = 0.1,
        gamma: float = 1.0,
        tol: float = 1e-6,
        max_iter: int = 1_000_000,
    ):
        self.C = C
        self.epsilon = epsilon
        self.gamma = gamma
        self.tol = tol
        self.max_iter = max_iter
        self.dual_coef_ = None

    def fit(self, X, y):
        X = as_float_matrix(X)
        y = as_float_vector(y, "targets")
        check_equal_length(X, y, "X and targets")
        if X.shape[0] < 2:
            raise ParameterError("SVR needs at least 2 samples")
        for name in ("C", "epsilon", "gamma"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} must be > 0, got {getattr(self, name)}")
        K = rbf_kernel(X, X, self.gamma)
        beta, n_iter, converged, g_up, g_down = svr_smo(
            K, y, float(self.C), float(self.epsilon), float(self.tol), int(self.max_iter)
        )
        if not converged:
            raise ConvergenceError(
                f"SVR did not reach tolerance {self.tol} in {self.max_iter} iterations "
                f"(violation {g_down - g_up:.3e})"
            )
        self.dual_coef_ = beta
        self.intercept_ = -(g_up + g_down) / 2.0
        self.support_ = np.flatnonzero(beta != 0.0)
        self.n_iter_ = int(n_iter)
        self.X_fit_ = X.copy()
        return self

    def predict(self, X) -> np.ndarray:
        check_fitted(self, "dual_coef_")
        X = as_float_matrix(X)
        if X.shape[1] != self.X_fit_.shape[1]:
            raise ParameterError(
                f"expected {self.X_fit_.shape[1]} input columns, got {X.shape[1]}"
            )
        if self.support_.size == 0:
            return np.full(X.shape[0], self.intercept_)
        K = rbf_kernel(X, self.X_fit_[self.support_], self.gamma)
        return K @ self.dual_coef_[self.support_] + self.intercept_

    @property
    def support_vectors_(self) -> np.ndarray:
        check_fitted(self, "dual_coef_")
        return self.X_fit_[self.support_]


def svr_fit(inputs, targets, hyper: tuple[float, float, float], tol: float = 1e-6,
            max_iter: int = 1_000_000) -> KernelSvr:
    """Fit with hyper = (C, epsilon, gamma)."""
    C, epsilon, gamma = hyper
    model = KernelSvr(C=C, epsilon=epsilon, gamma=gamma, tol=tol, max_iter=max_iter)
    return model.fit(inputs, targets)
