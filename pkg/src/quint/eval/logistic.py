"""L2-regularized logistic regression trained by full-batch gradient descent.

Features are standardized to zero mean and unit variance; the scaling is
folded into the weight products so sparse inputs stay sparse.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp


@dataclass(frozen=True)
class LogisticHyper:
    l2: float = 1e-4
    lr: float = 0.1
    epochs: int = 300


@dataclass
class LogisticModel:
    weights: np.ndarray
    bias: float
    hyper: LogisticHyper
    mean: np.ndarray = field(repr=False)
    scale: np.ndarray = field(repr=False)

    def decision_function(self, X) -> np.ndarray:
        return _linear(X, self.weights, self.bias, self.mean, self.scale)

    def predict_proba(self, X) -> np.ndarray:
        return _sigmoid(self.decision_function(X))

    def predict(self, X) -> np.ndarray:
        return (self.decision_function(X) >= 0).astype(np.int64)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return np.exp(-np.logaddexp(0.0, -z))


def _as_2d(X):
    if sp.issparse(X):
        return X.tocsr().astype(np.float64)
    X = np.asarray(X, dtype=np.float64)
    return X[:, None] if X.ndim == 1 else X


def _linear(X, w, b, mean, scale) -> np.ndarray:
    X = _as_2d(X)
    ws = w / scale
    return np.asarray(X @ ws).ravel() - float(mean @ ws) + b


def standardization(X) -> tuple[np.ndarray, np.ndarray]:
    X = _as_2d(X)
    if sp.issparse(X):
        mean = np.asarray(X.mean(axis=0)).ravel()
        sq = np.asarray(X.multiply(X).mean(axis=0)).ravel()
        var = np.maximum(sq - mean ** 2, 0.0)
    else:
        mean = X.mean(axis=0)
        var = X.var(axis=0)
    scale = np.sqrt(var)
    scale[scale == 0] = 1.0
    return mean, scale


def loss_and_grad(w, b, X, y, l2, mean, scale) -> tuple[float, np.ndarray, float]:
    """Mean log-loss plus ``l2/2 * |w|^2`` on standardized features, and its gradient."""
    X = _as_2d(X)
    z = _linear(X, w, b, mean, scale)
    s = 2.0 * y - 1.0
    loss = float(np.mean(np.logaddexp(0.0, -s * z)) + 0.5 * l2 * w @ w)
    r = (_sigmoid(z) - y) / len(y)
    xr = np.asarray(X.T @ r).ravel()
    gw = (xr - mean * r.sum()) / scale + l2 * w
    return loss, gw, float(r.sum())


def train_logistic(features, labels, hyper: LogisticHyper | None = None) -> LogisticModel:
    """Fit by ``epochs`` steps of gradient descent with step ``lr / sqrt(t)``."""
    hyper = hyper or LogisticHyper()
    X = _as_2d(features)
    y = np.asarray(labels, dtype=np.float64).ravel()
    if X.shape[0] != len(y) or len(y) < 2:
        raise ValueError("need at least two rows, one label per row")
    if not np.isin(y, (0.0, 1.0)).all():
        raise ValueError("labels must be 0/1")
    if y.min() == y.max():
        raise ValueError("labels contain a single class")
    data = X.data if sp.issparse(X) else X
    if not np.isfinite(data).all():
        raise ValueError("features contain non-finite values")
    mean, scale = standardization(X)
    w = np.zeros(X.shape[1])
    b = 0.0
    for t in range(1, hyper.epochs + 1):
        _, gw, gb = loss_and_grad(w, b, X, y, hyper.l2, mean, scale)
        step = hyper.lr / np.sqrt(t)
        w -= step * gw
        b -= step * gb
    return LogisticModel(w, b, hyper, mean, scale)
