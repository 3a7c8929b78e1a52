"""Stochastic-gradient Hamiltonian kernels: SGLD, SGHMC and SGNHT.

None of these applies a Metropolis-Hastings correction. Each takes a
gradient oracle ``grad_fn(theta, seeds) -> GradientEstimate``; when the
chain's seeds are not persistent a fresh seed vector is drawn every step and
shared by both sides of each finite difference.

A move that leaves the prior support is not taken: ``theta`` stays put and,
for the momentum kernels, the momentum is reversed.
"""
from __future__ import annotations

import logging

import numpy as np

from habc.core import draw_seed_vector
from habc.samplers.state import SamplerConfig, SamplerState

logger = logging.getLogger(__name__)


class DivergenceError(FloatingPointError):
    """The integrator produced a non-finite position, momentum or thermostat."""


def _gradient(state: SamplerState, grad_fn, cfg: SamplerConfig, stream):
    seeds = state.seeds
    if grad_fn.needs_seeds and not cfg.persistent_seeds:
        seeds = draw_seed_vector(cfg.n_seeds, stream)
    est = grad_fn(state.theta, seeds)
    if est.valid:
        return est.grad, est.sims_used, 0
    logger.info("step %d: invalid gradient estimate, using prior-only gradient", state.step)
    return grad_fn.prior_only(state.theta), est.sims_used, 1


def _outside(grad_fn, theta) -> bool:
    return not np.isfinite(theta).all() or grad_fn.log_prior(theta) == -np.inf


def _advance(state, sims, invalid, **changes) -> SamplerState:
    for key in ("theta", "momentum", "thermostat"):
        if key in changes and not np.isfinite(changes[key]).all():
            raise DivergenceError(f"non-finite {key} at step {state.step + 1}")
    # persistent replicates no longer match theta once it moves
    return state.evolve(step=state.step + 1, sim_calls=state.sim_calls + sims,
                        invalid_grads=state.invalid_grads + invalid,
                        replicates=None, loglik=None, **changes)


def sgld_step(state: SamplerState, grad_fn, cfg: SamplerConfig, stream: np.random.Generator,
              noise=None) -> SamplerState:
    """``theta <- theta + eta * N(0, M^-1) - eta^2 * M^-1 grad U / 2``."""
    g, sims, invalid = _gradient(state, grad_fn, cfg, stream)
    inv_mass = cfg.inv_mass(state.theta.size)
    if noise is None:
        noise = stream.standard_normal(state.theta.size)
    eta = cfg.eta
    theta = state.theta + eta * np.sqrt(inv_mass) * noise - 0.5 * eta * eta * inv_mass * g
    if _outside(grad_fn, theta):
        return _advance(state, sims, invalid, rejected_moves=state.rejected_moves + 1)
    return _advance(state, sims, invalid, theta=theta)


def sghmc_step(state: SamplerState, grad_fn, cfg: SamplerConfig, stream: np.random.Generator,
               noise=None) -> SamplerState:
    """SGHMC with friction ``C = c I + V`` and noise ``N(0, 2 eta (C - B))``.

    ``V`` is a running estimate of the gradient-noise variance (an
    exponential moving average of squared deviations from the running mean
    gradient) and ``B = eta V / 2``.
    """
    g, sims, invalid = _gradient(state, grad_fn, cfg, stream)
    eta = cfg.eta
    dim = state.theta.size
    inv_mass = cfg.inv_mass(dim)

    if not cfg.estimate_vhat:
        mean, var = np.zeros(dim), np.zeros(dim)
    elif state.grad_mean is None:
        mean, var = g.copy(), np.zeros(dim)
    else:
        a = cfg.vhat_decay
        dev = g - state.grad_mean
        mean = state.grad_mean + (1 - a) * dev
        var = a * state.grad_var + (1 - a) * dev * dev

    # the Euler friction step amplifies momentum once eta C / M > 2; the cap
    # at 1 only binds when V is large, e.g. under SPSA gradient noise
    friction = np.minimum(cfg.friction_c + var, 1.0 / (eta * inv_mass))
    noise_var = 2 * eta * (friction - 0.5 * eta * var)
    if np.any(noise_var < 0):
        logger.info("step %d: clamping negative SGHMC noise variance", state.step)
        noise_var = np.maximum(noise_var, 0.0)
    if noise is None:
        noise = stream.standard_normal(dim)
    rho = state.momentum
    with np.errstate(over="ignore", invalid="ignore"):
        rho = rho - eta * friction * inv_mass * rho - eta * g + np.sqrt(noise_var) * noise
        theta = state.theta + eta * inv_mass * rho
    if _outside(grad_fn, theta):
        return _advance(state, sims, invalid, momentum=-rho, grad_mean=mean, grad_var=var,
                        rejected_moves=state.rejected_moves + 1)
    return _advance(state, sims, invalid, theta=theta, momentum=rho, grad_mean=mean, grad_var=var)


def sgnht_step(state: SamplerState, grad_fn, cfg: SamplerConfig, stream: np.random.Generator,
               noise=None) -> SamplerState:
    """Stochastic-gradient Nose-Hoover thermostat step.

    Updates momentum, then position, then the thermostat, which is driven
    toward kinetic energy ``rho^T M^-1 rho / D = 1``.
    """
    g, sims, invalid = _gradient(state, grad_fn, cfg, stream)
    eta = cfg.eta
    dim = state.theta.size
    inv_mass = cfg.inv_mass(dim)
    if noise is None:
        noise = stream.standard_normal(dim)
    xi = state.thermostat
    rho = state.momentum
    with np.errstate(over="ignore", invalid="ignore"):
        rho = rho - eta * xi * rho - eta * g + np.sqrt(2 * eta * cfg.friction_c) * noise
        theta = state.theta + eta * inv_mass * rho
        xi = xi + eta * (float(np.sum(inv_mass * rho * rho)) / dim - 1.0)
    if _outside(grad_fn, theta):
        return _advance(state, sims, invalid, momentum=-rho, thermostat=xi,
                        rejected_moves=state.rejected_moves + 1)
    return _advance(state, sims, invalid, theta=theta, momentum=rho, thermostat=xi)
