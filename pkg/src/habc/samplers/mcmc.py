"""Metropolis-Hastings kernels: pseudo-marginal ABC-MCMC, seed flips, and HMC."""
from __future__ import annotations

import logging

import numpy as np

from habc.core import draw_seed_vector, prior_logpdf
from habc.likelihoods import kernel_eps_loglik, loglik
from habc.samplers.state import SamplerConfig, SamplerState

logger = logging.getLogger(__name__)


def _accept(log_ratio: float, stream: np.random.Generator) -> bool:
    u = stream.random()
    if np.isnan(log_ratio):
        # both densities zero: move rather than stick
        return True
    return bool(np.log(u) < log_ratio)


def _log_ratio(new: float, old: float) -> float:
    if old == -np.inf:
        return 0.0 if new > -np.inf else np.nan
    return new - old


def current_replicates(state: SamplerState, sim, y, eps, likelihood) -> SamplerState:
    """Materialize replicates and likelihood at ``(theta, seeds)`` if missing."""
    if state.replicates is not None and state.loglik is not None:
        return state
    if not sim.in_domain(state.theta):
        return state.evolve(replicates=np.full((len(state.seeds), sim.spec.stat_dim), np.nan),
                            loglik=-np.inf)
    x = sim.simulate_batch(state.theta, state.seeds)
    return state.evolve(replicates=x, loglik=loglik(likelihood, x, y, eps),
                        sim_calls=state.sim_calls + len(state.seeds))


def abc_mcmc_step(state: SamplerState, sim, y, eps, prior, proposal_std, likelihood,
                  stream: np.random.Generator, persistent_seeds: bool = False) -> SamplerState:
    """One pseudo-marginal random-walk Metropolis-Hastings step.

    Proposes ``theta' = theta + proposal_std * z`` together with replicates
    at ``theta'``: from fresh seeds, or from the state's seeds when they are
    persistent. Replicates are kept on rejection.
    """
    prior = prior or sim.spec.prior
    state = current_replicates(state, sim, y, eps, likelihood)
    theta_new = state.theta + np.asarray(proposal_std) * stream.standard_normal(state.theta.shape)
    n_seeds = len(state.seeds)
    seeds_new = state.seeds if persistent_seeds else draw_seed_vector(n_seeds, stream)

    lp_new = prior_logpdf(prior, theta_new)
    sims = state.sim_calls
    if lp_new == -np.inf or not sim.in_domain(theta_new):
        stream.random()
        return state.evolve(step=state.step + 1)
    x_new = sim.simulate_batch(theta_new, seeds_new)
    sims += n_seeds
    ll_new = loglik(likelihood, x_new, y, eps)
    log_r = _log_ratio(lp_new + ll_new, prior_logpdf(prior, state.theta) + state.loglik)
    if _accept(log_r, stream):
        return state.evolve(theta=theta_new, seeds=seeds_new, replicates=x_new, loglik=ll_new,
                            step=state.step + 1, sim_calls=sims, accepted=state.accepted + 1)
    return state.evolve(step=state.step + 1, sim_calls=sims)


def seed_flip_step(state: SamplerState, sim, y, eps, gamma: float, stream: np.random.Generator,
                   likelihood="synthetic", per_seed: bool = False) -> SamplerState:
    """Propose replacing each seed with probability ``gamma``; theta is held fixed.

    A proposed seed is drawn uniformly, its replicate simulated at the current
    theta, and the swap accepted with the likelihood ratio. By default the
    likelihood is evaluated on the whole replicate set with the one seed
    swapped, which leaves the joint target over ``(theta, seeds)`` invariant.

    With ``per_seed=True`` each seed is judged on its own kernel density
    ``N(y | x_s, eps^2)`` against a freshly re-simulated current replicate,
    costing exactly two simulations per proposal and no materialized set.
    """
    if gamma <= 0:
        return state
    n_seeds = len(state.seeds)
    flips = np.flatnonzero(stream.random(n_seeds) < gamma)
    if flips.size == 0:
        return state
    new_seeds = draw_seed_vector(flips.size, stream)
    log_u = np.log(stream.random(flips.size))
    seeds = state.seeds.copy()
    accepted = 0
    theta = state.theta

    if per_seed:
        sims = state.sim_calls
        for s, seed_new, lu in zip(flips, new_seeds, log_u):
            x_old = sim.simulate(theta, seeds[s])
            x_new = sim.simulate(theta, seed_new)
            sims += 2
            log_r = _log_ratio(kernel_eps_loglik(x_new[None], y, eps), kernel_eps_loglik(x_old[None], y, eps))
            if np.isnan(log_r) or lu < log_r:
                seeds[s] = seed_new
                accepted += 1
        return state.evolve(seeds=seeds, replicates=None, loglik=None, sim_calls=sims,
                            flips_proposed=state.flips_proposed + flips.size,
                            flips_accepted=state.flips_accepted + accepted)

    state = current_replicates(state, sim, y, eps, likelihood)
    x = state.replicates.copy()
    ll = state.loglik
    sims = state.sim_calls
    for s, seed_new, lu in zip(flips, new_seeds, log_u):
        cand = x.copy()
        cand[s] = sim.simulate(theta, seed_new) if sim.in_domain(theta) else np.nan
        sims += 1
        ll_new = loglik(likelihood, cand, y, eps)
        log_r = _log_ratio(ll_new, ll)
        if np.isnan(log_r) or lu < log_r:
            seeds[s], x, ll = seed_new, cand, ll_new
            accepted += 1
    return state.evolve(seeds=seeds, replicates=x, loglik=ll, sim_calls=sims,
                        flips_proposed=state.flips_proposed + flips.size,
                        flips_accepted=state.flips_accepted + accepted)


def leapfrog(theta, rho, grad_U, eta: float, n_steps: int, inv_mass=1.0):
    """Leapfrog integration of Hamiltonian dynamics for ``n_steps`` steps."""
    theta = np.array(theta, dtype=float)
    rho = np.array(rho, dtype=float)
    if n_steps == 0:
        return theta, rho
    rho = rho - 0.5 * eta * grad_U(theta)
    for i in range(n_steps):
        theta = theta + eta * inv_mass * rho
        if i < n_steps - 1:
            rho = rho - eta * grad_U(theta)
    rho = rho - 0.5 * eta * grad_U(theta)
    return theta, rho


def hmc_reference_step(state: SamplerState, target, cfg: SamplerConfig, leapfrog_steps: int,
                       stream: np.random.Generator) -> SamplerState:
    """Exact-gradient HMC with a Metropolis-Hastings correction.

    ``target`` supplies ``potential`` and ``grad_potential`` callables.
    """
    theta = state.theta
    inv_mass = cfg.inv_mass(theta.size)
    rho = stream.standard_normal(theta.size) / np.sqrt(inv_mass)
    u = stream.random()
    theta_new, rho_new = leapfrog(theta, rho, target.grad_potential, cfg.eta, leapfrog_steps, inv_mass)
    h_old = target.potential(theta) + 0.5 * np.sum(inv_mass * rho * rho)
    h_new = target.potential(theta_new) + 0.5 * np.sum(inv_mass * rho_new * rho_new)
    if np.isfinite(h_new) and np.log(u) < h_old - h_new:
        return state.evolve(theta=theta_new, momentum=rho_new, step=state.step + 1,
                            accepted=state.accepted + 1)
    return state.evolve(momentum=rho, step=state.step + 1)
