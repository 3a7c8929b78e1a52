"""Stochastic estimates of the potential gradient from forward simulations.

Both finite-difference (FDSA) and simultaneous-perturbation (SPSA) estimators
evaluate the two sides of every difference with the same seed vector (common
random numbers). Estimates are of ``grad U = -grad log prior - grad log L``.
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from habc.core import PriorSpec, as_theta, draw_seed_vector, prior_grad_logpdf
from habc.likelihoods import Likelihood, loglik

logger = logging.getLogger(__name__)


class Method(str, enum.Enum):
    FDSA = "fdsa"
    SPSA = "spsa"
    EXACT = "exact"


@dataclass(frozen=True)
class GradientConfig:
    d_theta: float | tuple = 1e-2
    repeats: int = 1
    method: Method = Method.SPSA
    likelihood: Likelihood = Likelihood.SYNTHETIC

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        object.__setattr__(self, "likelihood", Likelihood(self.likelihood))
        d = np.asarray(self.d_theta, dtype=float)
        if not np.all(d > 0):
            raise ValueError("d_theta must be > 0")
        if d.ndim:
            object.__setattr__(self, "d_theta", tuple(float(v) for v in d))
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")

    def widths(self, dim: int) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.d_theta, dtype=float), (dim,))


@dataclass
class GradientEstimate:
    grad: np.ndarray
    sims_used: int = 0
    method: str = "exact"
    valid: bool = True


def draw_mask(dim: int, stream: np.random.Generator) -> np.ndarray:
    """Rademacher perturbation mask: i.i.d. +1/-1 entries."""
    return 2.0 * stream.integers(0, 2, size=dim) - 1.0


# --------------------------------------------------------------------------
# Black-box estimators of grad L
# --------------------------------------------------------------------------


def fdsa_gradient(L: Callable, theta, d_theta) -> tuple[np.ndarray, bool]:
    """Central differences of ``L`` along each coordinate axis."""
    theta = as_theta(theta)
    d = np.broadcast_to(np.asarray(d_theta, dtype=float), theta.shape)
    g = np.empty_like(theta)
    valid = True
    for r in range(theta.size):
        step = np.zeros_like(theta)
        step[r] = d[r]
        diff = L(theta + step) - L(theta - step)
        valid &= bool(np.isfinite(diff))
        g[r] = diff / (2 * d[r])
    return g, valid


def spsa_gradient(L: Callable, theta, d_theta, masks) -> tuple[np.ndarray, bool]:
    """Simultaneous-perturbation estimate averaged over the rows of ``masks``.

    Mask entries are +-1, so the reciprocal of a mask equals the mask.
    """
    theta = as_theta(theta)
    d = np.broadcast_to(np.asarray(d_theta, dtype=float), theta.shape)
    masks = np.atleast_2d(masks)
    g = np.zeros_like(theta)
    valid = True
    for delta in masks:
        diff = L(theta + d * delta) - L(theta - d * delta)
        valid &= bool(np.isfinite(diff))
        g += diff * delta
    return g / (2 * d * len(masks)), valid


# --------------------------------------------------------------------------
# Simulator-driven estimators of grad U
# --------------------------------------------------------------------------


def crn_loglik(sim, seeds, y, eps, kind) -> Callable:
    """``theta -> log L(theta)`` with the seed vector held fixed."""
    def L(theta):
        if not sim.in_domain(theta):
            return -np.inf
        return loglik(kind, sim.simulate_batch(theta, seeds), y, eps)
    return L


def _finish(g_lik, valid, theta, prior, sims, method) -> GradientEstimate:
    if not valid:
        return GradientEstimate(np.full(theta.shape, np.nan), sims, method, valid=False)
    return GradientEstimate(-(g_lik + prior_grad_logpdf(prior, theta)), sims, method)


def fdsa_grad_U(sim, theta, seeds, y, eps, prior: PriorSpec | None, cfg: GradientConfig) -> GradientEstimate:
    """FDSA estimate of ``grad U``; uses ``2 S D`` simulations."""
    theta = as_theta(theta, sim.spec.param_dim)
    prior = prior or sim.spec.prior
    g, valid = fdsa_gradient(crn_loglik(sim, seeds, y, eps, cfg.likelihood), theta, cfg.widths(theta.size))
    return _finish(g, valid, theta, prior, 2 * len(seeds) * theta.size, "fdsa")


def spsa_grad_U(sim, theta, seeds, y, eps, prior: PriorSpec | None, cfg: GradientConfig,
                mask_stream: np.random.Generator, masks=None) -> GradientEstimate:
    """SPSA estimate of ``grad U`` averaged over ``R`` masks; ``2 S R`` simulations.

    ``masks`` may be passed explicitly (shape ``(R, D)``) instead of drawn.
    """
    theta = as_theta(theta, sim.spec.param_dim)
    prior = prior or sim.spec.prior
    if masks is None:
        masks = np.array([draw_mask(theta.size, mask_stream) for _ in range(cfg.repeats)])
    masks = np.atleast_2d(masks)
    g, valid = spsa_gradient(crn_loglik(sim, seeds, y, eps, cfg.likelihood), theta, cfg.widths(theta.size), masks)
    return _finish(g, valid, theta, prior, 2 * len(seeds) * len(masks), "spsa")


def exact_grad_U(target, theta, batch=None) -> GradientEstimate:
    """Mini-batch-scaled analytic gradient of ``U`` for targets that expose one."""
    _, g = target.loglik_and_grad(theta, batch)
    return GradientEstimate(-g, 0, "exact")


def gradient_variance_probe(sim, theta, y, eps, cfg: GradientConfig, trials: int, n_seeds: int,
                            stream: np.random.Generator, prior: PriorSpec | None = None):
    """Mean and standard deviation of ``grad U`` estimates over fresh seed draws.

    Invalid estimates are excluded; returns ``(mean, sd, n_valid)``.
    """
    if trials < 2:
        raise ValueError("trials must be >= 2")
    prior = prior or sim.spec.prior
    grads = []
    for _ in range(trials):
        seeds = draw_seed_vector(n_seeds, stream)
        if cfg.method is Method.FDSA:
            est = fdsa_grad_U(sim, theta, seeds, y, eps, prior, cfg)
        else:
            est = spsa_grad_U(sim, theta, seeds, y, eps, prior, cfg, stream)
        if est.valid:
            grads.append(est.grad)
    grads = np.array(grads)
    return grads.mean(axis=0), grads.std(axis=0, ddof=1), len(grads)


# --------------------------------------------------------------------------
# Gradient oracles consumed by the samplers
# --------------------------------------------------------------------------


@dataclass
class ABCGradient:
    """Simulator-driven ``grad U`` for a chain.

    Called as ``oracle(theta, seeds)``; SPSA masks come from ``mask_stream``,
    which should be a substream separate from the one that draws seeds.
    """

    sim: object
    y: np.ndarray
    eps: np.ndarray
    cfg: GradientConfig
    n_seeds: int
    mask_stream: np.random.Generator | None = None
    prior: PriorSpec | None = None
    needs_seeds: bool = field(default=True, init=False)

    def __post_init__(self):
        self.prior = self.prior or self.sim.spec.prior
        self.y = np.atleast_1d(np.asarray(self.y, dtype=float))
        self.eps = np.broadcast_to(np.asarray(self.eps, dtype=float), self.y.shape)

    def __call__(self, theta, seeds) -> GradientEstimate:
        if self.cfg.method is Method.FDSA:
            return fdsa_grad_U(self.sim, theta, seeds, self.y, self.eps, self.prior, self.cfg)
        return spsa_grad_U(self.sim, theta, seeds, self.y, self.eps, self.prior, self.cfg, self.mask_stream)

    def prior_only(self, theta) -> np.ndarray:
        return -prior_grad_logpdf(self.prior, theta)

    def log_prior(self, theta) -> float:
        return self.prior.logpdf(theta)


@dataclass
class AnalyticGradient:
    """Exact gradients of a known potential ``U``."""

    potential: Callable
    grad_potential: Callable
    needs_seeds: bool = field(default=False, init=False)

    def __call__(self, theta, seeds=None) -> GradientEstimate:
        return GradientEstimate(np.asarray(self.grad_potential(theta), dtype=float), 0, "exact")

    def prior_only(self, theta) -> np.ndarray:
        return self(theta).grad

    def log_prior(self, theta) -> float:
        return 0.0 if np.isfinite(self.potential(theta)) else -np.inf


def gaussian_target(dim: int = 1) -> AnalyticGradient:
    """Standard normal ``U(theta) = |theta|^2 / 2``."""
    return AnalyticGradient(lambda t: 0.5 * float(np.dot(t, t)), lambda t: np.asarray(t, dtype=float))


@dataclass
class MinibatchGradient:
    """Logistic-regression ``grad U`` on random mini-batches.

    ``method="exact"`` uses the analytic mini-batch gradient; ``"spsa"``
    treats the scaled mini-batch log-likelihood as a black box, evaluating
    both sides of every perturbation on the same batch, and adds the exact
    prior gradient.
    """

    target: object
    batch_size: int
    stream: np.random.Generator
    method: Method = Method.EXACT
    d_theta: float = 1e-2
    repeats: int = 1
    needs_seeds: bool = field(default=False, init=False)

    def __post_init__(self):
        self.method = Method(self.method)

    def batch(self) -> np.ndarray:
        return self.stream.choice(self.target.n_data, size=self.batch_size, replace=False)

    def __call__(self, theta, seeds=None) -> GradientEstimate:
        idx = self.batch()
        if self.method is Method.EXACT:
            return exact_grad_U(self.target, theta, idx)
        theta = as_theta(theta, self.target.dim)
        masks = np.array([draw_mask(theta.size, self.stream) for _ in range(self.repeats)])
        g, valid = spsa_gradient(lambda t: self.target.loglik(t, idx), theta, self.d_theta, masks)
        return GradientEstimate(-(g + self.target.grad_log_prior(theta)), 0, "spsa", valid)

    def prior_only(self, theta) -> np.ndarray:
        return -self.target.grad_log_prior(np.asarray(theta, dtype=float))

    def log_prior(self, theta) -> float:
        return self.target.log_prior(np.asarray(theta, dtype=float))
