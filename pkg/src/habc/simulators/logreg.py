"""Bayesian multinomial logistic regression on a bundled two-class digit set.

Weights are one row of ``P`` coefficients per class, flattened class-major,
so two classes of 8x8 images give ``D = 128``. A ``fit_intercept`` option
appends a constant feature to every row.
"""
from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

import numpy as np
from scipy.special import log_softmax, softmax

from habc.core import ShapeError, as_theta


def load_digits_csv(path=None) -> tuple[np.ndarray, np.ndarray]:
    """Read ``label,f1,...,fP`` rows; returns ``(features, labels)``."""
    if path is None:
        path = resources.files("habc.simulators") / "data" / "digits01.csv"
    data = np.loadtxt(path, delimiter=",", ndmin=2)
    return data[:, 1:], data[:, 0].astype(int)


@dataclass(frozen=True)
class LogisticRegressionTarget:
    features: np.ndarray
    labels: np.ndarray
    n_classes: int = 2
    prior_sigma: float = 1.0
    fit_intercept: bool = False

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.features, dtype=float))
        y = np.asarray(self.labels, dtype=int).reshape(-1)
        if X.shape[0] != y.shape[0] or X.shape[0] < 1:
            raise ShapeError("features and labels must have the same number (>= 1) of rows")
        if not np.all(np.isfinite(X)):
            raise ValueError("features must be finite")
        if y.min() < 0 or y.max() >= self.n_classes:
            raise ValueError(f"labels must lie in [0, {self.n_classes})")
        if self.fit_intercept:
            X = np.hstack([X, np.ones((X.shape[0], 1))])
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)

    @classmethod
    def bundled(cls, **kwargs) -> "LogisticRegressionTarget":
        X, y = load_digits_csv()
        return cls(X, y, **kwargs)

    @property
    def n_data(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.n_classes * self.features.shape[1]

    def log_prior(self, theta: np.ndarray) -> float:
        s = self.prior_sigma
        return float(-0.5 * theta @ theta / s**2 - theta.size * (np.log(s) + 0.5 * np.log(2 * np.pi)))

    def grad_log_prior(self, theta: np.ndarray) -> np.ndarray:
        return -theta / self.prior_sigma**2

    def _weights(self, theta) -> np.ndarray:
        return as_theta(theta, self.dim).reshape(self.n_classes, -1)

    def loglik(self, theta, batch=None) -> float:
        """Data log-likelihood of a mini-batch scaled by ``N/n`` (no prior)."""
        W = self._weights(theta)
        idx = np.arange(self.n_data) if batch is None else np.asarray(batch)
        logp = log_softmax(self.features[idx] @ W.T, axis=1)
        return float(self.n_data / idx.size * logp[np.arange(idx.size), self.labels[idx]].sum())

    def loglik_and_grad(self, theta, batch=None) -> tuple[float, np.ndarray]:
        """Scaled mini-batch log-likelihood plus log prior, with its gradient."""
        return logreg_minibatch_loglik_and_grad(self, theta, batch)


def logreg_minibatch_loglik_and_grad(target: LogisticRegressionTarget, theta, batch_indices=None):
    W = target._weights(theta)
    theta = W.reshape(-1)
    idx = np.arange(target.n_data) if batch_indices is None else np.asarray(batch_indices)
    if idx.ndim != 1 or idx.size < 1:
        raise ShapeError("batch indices must be a non-empty 1-d array")
    X, y = target.features[idx], target.labels[idx]
    logits = X @ W.T
    logp = log_softmax(logits, axis=1)
    scale = target.n_data / idx.size
    value = scale * logp[np.arange(idx.size), y].sum() + target.log_prior(theta)
    resid = -softmax(logits, axis=1)
    resid[np.arange(idx.size), y] += 1.0
    grad = scale * (resid.T @ X).reshape(-1) + target.grad_log_prior(theta)
    return float(value), grad


def sgd_map(target: LogisticRegressionTarget, stream: np.random.Generator, steps: int = 5000,
            batch_size: int = 100, lr: float = 3e-3, decay: float = 1000.0, theta0=None) -> np.ndarray:
    """MAP estimate by stochastic gradient ascent on the exact mini-batch gradient.

    Step size ``lr / (1 + t / decay)``; the final estimate averages the
    last half of the iterates.
    """
    theta = np.zeros(target.dim) if theta0 is None else as_theta(theta0, target.dim).copy()
    tail = np.zeros_like(theta)
    start = steps // 2
    for t in range(steps):
        idx = stream.choice(target.n_data, size=min(batch_size, target.n_data), replace=False)
        _, g = logreg_minibatch_loglik_and_grad(target, theta, idx)
        theta = theta + lr / (1.0 + t / decay) * g
        if t >= start:
            tail += theta
    return tail / max(steps - start, 1) if steps else theta
