"""ABC log-likelihoods over a set of simulation replicates.

Replicate outputs are arrays of shape ``(S, J)``: ``S`` replicates of ``J``
statistics. Kernel widths are per statistic.
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from habc.core import ShapeError

logger = logging.getLogger(__name__)

_LOG_2PI = float(np.log(2 * np.pi))


class Likelihood(str, enum.Enum):
    KERNEL_EPS = "kernel"
    SYNTHETIC = "synthetic"


@dataclass(frozen=True)
class ReplicateSet:
    """Replicate outputs together with the parameter and seeds that made them."""

    outputs: np.ndarray
    theta: np.ndarray
    seeds: np.ndarray

    def __post_init__(self):
        outputs = np.atleast_2d(np.asarray(self.outputs, dtype=float))
        if outputs.shape[0] != len(self.seeds):
            raise ShapeError("one output row per seed is required")
        object.__setattr__(self, "outputs", outputs)

    @property
    def degenerate(self) -> np.ndarray:
        return ~np.all(np.isfinite(self.outputs), axis=1)

    @property
    def size(self) -> int:
        return self.outputs.shape[0]


@dataclass(frozen=True)
class SyntheticMoments:
    mu: np.ndarray
    sigma2: np.ndarray
    degenerate: bool = False


def _outputs(reps) -> np.ndarray:
    if isinstance(reps, ReplicateSet):
        return reps.outputs
    return np.atleast_2d(np.asarray(reps, dtype=float))


def _check_dims(x: np.ndarray, y: np.ndarray, eps: np.ndarray):
    if x.shape[-1] != y.shape[0] or eps.shape != y.shape:
        raise ShapeError(f"dimension mismatch: outputs {x.shape}, y {y.shape}, eps {eps.shape}")


def kernel_eps_loglik(reps, y, eps) -> float:
    """Log of the replicate-averaged Gaussian kernel density of ``y``.

    Degenerate replicates contribute zero density but still count in the
    ``1/S`` average; if every replicate is degenerate the result is ``-inf``.
    """
    x = _outputs(reps)
    y = np.atleast_1d(np.asarray(y, dtype=float))
    eps = np.broadcast_to(np.asarray(eps, dtype=float), y.shape)
    _check_dims(x, y, eps)
    z = (y - x) / eps
    terms = -0.5 * np.sum(z * z, axis=1)
    bad = ~np.isfinite(terms)
    if bad.any():
        logger.debug("kernel likelihood dropped %d degenerate replicate(s)", int(bad.sum()))
        if bad.all():
            return -np.inf
        terms = np.where(bad, -np.inf, terms)
    norm = -np.sum(np.log(eps)) - 0.5 * y.size * _LOG_2PI
    return float(logsumexp(terms) - np.log(x.shape[0]) + norm)


def synthetic_moments(reps) -> SyntheticMoments:
    """Per-statistic mean and unbiased variance of the replicates."""
    x = _outputs(reps)
    if x.shape[0] < 2:
        raise ValueError("synthetic moments need at least 2 replicates")
    if not np.all(np.isfinite(x)):
        nan = np.full(x.shape[1], np.nan)
        return SyntheticMoments(nan, nan, degenerate=True)
    mu = x.mean(axis=0)
    sigma2 = np.sum((x - mu) ** 2, axis=0) / (x.shape[0] - 1)
    return SyntheticMoments(mu, sigma2)


def synthetic_loglik(moments: SyntheticMoments, y, eps) -> float:
    """``log N(y | mu, sigma2 + eps^2)`` with a diagonal covariance."""
    if moments.degenerate:
        return -np.inf
    y = np.atleast_1d(np.asarray(y, dtype=float))
    eps = np.broadcast_to(np.asarray(eps, dtype=float), y.shape)
    _check_dims(moments.mu[None], y, eps)
    var = moments.sigma2 + eps * eps
    r = y - moments.mu
    return float(-0.5 * np.sum(np.log(var) + _LOG_2PI + r * r / var))


def loglik(kind, reps, y, eps) -> float:
    """Evaluate the configured likelihood model on a replicate set."""
    kind = Likelihood(kind)
    if kind is Likelihood.KERNEL_EPS:
        return kernel_eps_loglik(reps, y, eps)
    return synthetic_loglik(synthetic_moments(reps), y, eps)
