"""Forecast combination: uniform mean, OLS linear blend, and an MLP blender.

The MLP is a plain fully connected network (ReLU hidden layers, identity
output) trained with mini-batch Adam on squared error plus an L2 penalty on
the weights, mirroring the usual MLPRegressor conventions: per-batch loss
0.5*mean(err^2) + 0.5*alpha*||W||^2/batch, biases unpenalized.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from .exceptions import DataError, NumericalError
from .feature_bank import FeatureMatrix
from .validation import as_float_matrix, as_float_vector, check_equal_length, check_fitted


class RankDeficientWarning(UserWarning):
    """The blending design matrix was rank deficient; minimum-norm weights returned."""


@dataclass(frozen=True)
class BlendWeights:
    """Linear blend weights; the last entry multiplies the bias column."""

    w: np.ndarray = field(repr=False)

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float)
        object.__setattr__(self, "w", w)
        if w.ndim != 1 or not np.all(np.isfinite(w)):
            raise DataError("weights must be a finite vector")

    @property
    def intercept(self) -> float:
        return float(self.w[-1])

    def to_dict(self) -> dict:
        return {"weights": list(self.w[:-1]), "intercept": self.intercept}


def _prediction_columns(X) -> np.ndarray:
    """Prediction part of a blend input: FeatureMatrix or array carrying a bias column."""
    if isinstance(X, FeatureMatrix):
        return X.values[:, :-1]
    arr = as_float_matrix(X)
    return arr[:, :-1]


def _full_matrix(X) -> np.ndarray:
    if isinstance(X, FeatureMatrix):
        return X.values
    return as_float_matrix(X)


def uniform_blend(X) -> np.ndarray:
    """Equal-weight mean of the prediction columns (bias excluded)."""
    preds = _prediction_columns(X)
    if preds.shape[1] == 0:
        raise DataError("uniform blend needs at least one prediction column")
    return preds.mean(axis=1)


def ols_fit(X, targets) -> BlendWeights:
    """Least-squares blend weights via an orthogonal decomposition.

    Rank-deficient designs return the minimum-norm solution and emit a
    RankDeficientWarning.
    """
    mat = _full_matrix(X)
    y = as_float_vector(targets, "targets")
    check_equal_length(mat, y, "X and targets")
    if mat.shape[0] <= mat.shape[1]:
        raise DataError(
            f"need more rows than columns to fit the blend: {mat.shape[0]} x {mat.shape[1]}"
        )
    w, _, rank, _ = np.linalg.lstsq(mat, y, rcond=None)
    if rank < mat.shape[1]:
        warnings.warn(
            f"design matrix rank {rank} < {mat.shape[1]}; returning minimum-norm weights",
            RankDeficientWarning,
        )
    return BlendWeights(w)


def linear_blend(X, weights) -> np.ndarray:
    """Row-wise dot product x_t'w."""
    mat = _full_matrix(X)
    w = weights.w if isinstance(weights, BlendWeights) else as_float_vector(weights, "weights")
    if mat.shape[1] != w.shape[0]:
        raise DataError(f"weight length {w.shape[0]} does not match {mat.shape[1]} columns")
    return mat @ w


class OlsBlender(BaseEstimator):
    """sklearn-style wrapper around ols_fit/linear_blend."""

    def __init__(self):
        self.weights_ = None

    def fit(self, X, y):
        self.weights_ = ols_fit(X, y)
        return self

    def predict(self, X) -> np.ndarray:
        check_fitted(self, "weights_")
        return linear_blend(X, self.weights_)


# ---------------------------------------------------------------------------
# MLP blender
# ---------------------------------------------------------------------------


def _relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


class MlpBlender(BaseEstimator):
    """Fully connected regressor trained with Adam; deterministic per seed.

    Weight matrices are initialized uniformly in +-sqrt(6/(fan_in+fan_out)).
    Inputs are standardized with statistics from the fit call; constant
    columns get unit scale so a trailing bias column passes through harmless.
    Targets are divided by their training standard deviation during fit and
    predictions are scaled back: constant-learning-rate Adam oscillates with
    step size ~lr, which swamps raw variance-scale (1e-4) targets.
    Validation data, when provided, drives early stopping with the given
    patience, and the best-validation-epoch weights are restored.
    """

    def __init__(
        self,
        hidden_layers: tuple[int, ...] = (100, 50, 50),
        learning_rate: float = 1e-3,
        batch_size: int = 200,
        l2_alpha: float = 1e-4,
        beta1: float = 0.9,
        beta2: float = 0.999,
        adam_eps: float = 1e-8,
        max_epochs: int = 500,
        patience: int = 50,
        random_state: int = 0,
        standardize: bool = True,
    ):
        self.hidden_layers = hidden_layers
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.l2_alpha = l2_alpha
        self.beta1 = beta1
        self.beta2 = beta2
        self.adam_eps = adam_eps
        self.max_epochs = max_epochs
        self.patience = patience
        self.random_state = random_state
        self.standardize = standardize
        self.coefs_ = None

    # -- internals ---------------------------------------------------------

    def _init_weights(self, n_inputs: int, rng: np.random.Generator):
        sizes = [n_inputs, *self.hidden_layers, 1]
        coefs, intercepts = [], []
        for fan_in, fan_out in zip(sizes, sizes[1:]):
            bound = np.sqrt(6.0 / (fan_in + fan_out))
            coefs.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
            intercepts.append(np.zeros(fan_out))
        return coefs, intercepts

    def _scale_inputs(self, X: np.ndarray) -> np.ndarray:
        if not self.standardize:
            return X
        return (X - self.input_mean_) / self.input_scale_

    def _forward(self, X: np.ndarray, coefs, intercepts):
        activations = [X]
        for layer, (W, b) in enumerate(zip(coefs, intercepts)):
            z = activations[-1] @ W + b
            activations.append(_relu(z) if layer < len(coefs) - 1 else z)
        return activations

    def _loss_and_grads(self, X: np.ndarray, y: np.ndarray, coefs, intercepts):
        """Batch objective 0.5*mean(err^2) + 0.5*alpha*||W||^2/n and its gradients."""
        n = X.shape[0]
        activations = self._forward(X, coefs, intercepts)
        err = activations[-1][:, 0] - y
        penalty = sum(float(np.sum(W * W)) for W in coefs)
        loss = 0.5 * float(np.mean(err * err)) + 0.5 * self.l2_alpha * penalty / n
        grad_coefs = [None] * len(coefs)
        grad_intercepts = [None] * len(coefs)
        delta = err[:, None]
        for layer in range(len(coefs) - 1, -1, -1):
            grad_coefs[layer] = (activations[layer].T @ delta + self.l2_alpha * coefs[layer]) / n
            grad_intercepts[layer] = delta.sum(axis=0) / n
            if layer > 0:
                delta = (delta @ coefs[layer].T) * (activations[layer] > 0.0)
        return loss, grad_coefs, grad_intercepts

    # -- estimator API -----------------------------------------------------

    def fit(self, X, y, X_val=None, y_val=None):
        X = _full_matrix(X)
        y = as_float_vector(y, "targets")
        check_equal_length(X, y, "X and targets")
        rng = np.random.default_rng(self.random_state)
        if self.standardize:
            self.input_mean_ = X.mean(axis=0)
            scale = X.std(axis=0)
            scale[scale < 1e-12] = 1.0
            self.input_scale_ = scale
            y_scale = float(np.std(y))
            self.target_scale_ = y_scale if y_scale > 1e-300 else 1.0
        else:
            self.target_scale_ = 1.0
        Xs = self._scale_inputs(X)
        y = y / self.target_scale_
        coefs, intercepts = self._init_weights(X.shape[1], rng)
        if X_val is not None:
            X_val = _full_matrix(X_val)
            y_val = as_float_vector(y_val, "validation targets") / self.target_scale_
            check_equal_length(X_val, y_val, "validation X and targets")
            Xv = self._scale_inputs(X_val)
        n = X.shape[0]
        batch = max(1, min(self.batch_size, n))
        adam_m = [np.zeros_like(W) for W in coefs] + [np.zeros_like(b) for b in intercepts]
        adam_v = [np.zeros_like(W) for W in coefs] + [np.zeros_like(b) for b in intercepts]
        step = 0
        self.loss_curve_ = []
        self.validation_scores_ = []
        best_val = np.inf
        best_epoch = -1
        best_state = None
        n_layers = len(coefs)
        for epoch in range(self.max_epochs):
            order = rng.permutation(n)
            for start in range(0, n, batch):
                idx = order[start : start + batch]
                loss, g_coefs, g_intercepts = self._loss_and_grads(Xs[idx], y[idx], coefs, intercepts)
                if not np.isfinite(loss):
                    raise NumericalError(
                        f"MLP training diverged at epoch {epoch} (non-finite batch loss)"
                    )
                step += 1
                bias1 = 1.0 - self.beta1**step
                bias2 = 1.0 - self.beta2**step
                grads = g_coefs + g_intercepts
                params = coefs + intercepts
                for k, (param, grad) in enumerate(zip(params, grads)):
                    adam_m[k] = self.beta1 * adam_m[k] + (1.0 - self.beta1) * grad
                    adam_v[k] = self.beta2 * adam_v[k] + (1.0 - self.beta2) * grad * grad
                    param -= self.learning_rate * (adam_m[k] / bias1) / (
                        np.sqrt(adam_v[k] / bias2) + self.adam_eps
                    )
            full_loss, _, _ = self._loss_and_grads(Xs, y, coefs, intercepts)
            self.loss_curve_.append(full_loss)
            if X_val is not None:
                pred_val = self._forward(Xv, coefs, intercepts)[-1][:, 0]
                val_mse = float(np.mean((pred_val - y_val) ** 2))
                self.validation_scores_.append(val_mse)
                if val_mse < best_val:
                    best_val = val_mse
                    best_epoch = epoch
                    best_state = ([W.copy() for W in coefs], [b.copy() for b in intercepts])
                elif epoch - best_epoch > self.patience:
                    break
        if best_state is not None:
            coefs, intercepts = best_state
        self.coefs_ = coefs
        self.intercepts_ = intercepts
        self.best_epoch_ = best_epoch if best_state is not None else None
        self.n_layers_ = n_layers
        self.training_predictions_ = self.predict(X)
        return self

    def predict(self, X) -> np.ndarray:
        check_fitted(self, "coefs_")
        X = _full_matrix(X)
        if X.shape[1] != self.coefs_[0].shape[0]:
            raise DataError(
                f"expected {self.coefs_[0].shape[0]} input columns, got {X.shape[1]}"
            )
        Xs = self._scale_inputs(X)
        raw = self._forward(Xs, self.coefs_, self.intercepts_)[-1][:, 0]
        return raw * self.target_scale_

    def loss_and_gradients(self, X, y):
        """Internal objective and gradients at the current weights, for verification."""
        check_fitted(self, "coefs_")
        X = self._scale_inputs(_full_matrix(X))
        y = as_float_vector(y, "targets") / self.target_scale_
        loss, g_coefs, g_intercepts = self._loss_and_grads(X, y, self.coefs_, self.intercepts_)
        return loss, g_coefs, g_intercepts

    def to_dict(self) -> dict:
        """JSON-ready snapshot of the fitted network for reproducibility manifests."""
        check_fitted(self, "coefs_")
        return {
            "config": self.get_params(),
            "target_scale": self.target_scale_,
            "input_mean": self.input_mean_.tolist() if self.standardize else None,
            "input_scale": self.input_scale_.tolist() if self.standardize else None,
            "coefs": [w.tolist() for w in self.coefs_],
            "intercepts": [b.tolist() for b in self.intercepts_],
            "best_epoch": self.best_epoch_,
        }


def mlp_fit(X, y, X_val=None, y_val=None, **config) -> MlpBlender:
    """Functional form of MlpBlender(**config).fit(...)."""
    model = MlpBlender(**config)
    return model.fit(X, y, X_val=X_val, y_val=y_val)


def mlp_predict(model: MlpBlender, X) -> np.ndarray:
    return model.predict(X)
