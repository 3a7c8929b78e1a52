"""Running chains: interleaving kernels with seed flips and recording traces."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import partial
from typing import Callable

import numpy as np

from habc.core import as_theta, derive_stream, draw_seed_vector
from habc.diagnostics import ChainTrace
from habc.gradients import ABCGradient, Method
from habc.likelihoods import Likelihood
from habc.samplers.mcmc import abc_mcmc_step, hmc_reference_step, seed_flip_step
from habc.samplers.sghd import sghmc_step, sgld_step, sgnht_step
from habc.samplers.state import SamplerConfig, SamplerState

KERNELS = ("abc_mcmc", "sgld", "sghmc", "sgnht", "hmc")
_SGHD = {"sgld": sgld_step, "sghmc": sghmc_step, "sgnht": sgnht_step}


class ChainFailure(RuntimeError):
    """A chain stopped early; ``trace`` holds the samples recorded so far."""

    def __init__(self, message: str, trace: ChainTrace, state: SamplerState):
        super().__init__(message)
        self.trace = trace
        self.state = state

    def __reduce__(self):
        return type(self), (str(self), self.trace, self.state)


@dataclass
class Recorder:
    """Collects thinned samples and per-sample momentum diagnostics."""

    dim: int
    samples: list = field(default_factory=list)
    steps: list = field(default_factory=list)
    kinetic: list = field(default_factory=list)
    thermostat: list = field(default_factory=list)

    def record(self, state: SamplerState):
        self.samples.append(state.theta.copy())
        self.steps.append(state.step)
        if state.momentum is not None:
            self.kinetic.append(float(state.momentum @ state.momentum) / self.dim)
        if state.thermostat is not None:
            self.thermostat.append(state.thermostat)

    def trace(self, **kwargs) -> ChainTrace:
        samples = np.array(self.samples) if self.samples else np.empty((0, self.dim))
        extras = {}
        if self.kinetic:
            extras["kinetic"] = np.array(self.kinetic)
        if self.thermostat:
            extras["thermostat"] = np.array(self.thermostat)
        return ChainTrace(samples, np.array(self.steps, dtype=int), extras=extras, **kwargs)


def run_chain(initial: SamplerState, kernel: Callable, num_steps: int, thinning: int = 1,
              flip: Callable | None = None, recorder: Recorder | None = None,
              tag: str = "") -> tuple[ChainTrace, SamplerState]:
    """Advance ``kernel`` (then ``flip``, if given) ``num_steps`` times.

    Returns the thinned trace and the final state. ``sim_calls`` on the
    trace counts simulations made during these steps only.
    """
    if thinning < 1:
        raise ValueError("thinning must be >= 1")
    recorder = recorder or Recorder(initial.theta.size)
    state = initial

    def finish():
        return recorder.trace(sim_calls=state.sim_calls - initial.sim_calls, kernel=tag,
                              invalid_grads=state.invalid_grads - initial.invalid_grads)

    for t in range(num_steps):
        try:
            state = kernel(state)
            if flip is not None:
                state = flip(state)
        except Exception as exc:
            raise ChainFailure(f"chain failed at step {t}: {exc}", finish(), state) from exc
        if (t + 1) % thinning == 0:
            recorder.record(state)
    return finish(), state


def init_state(theta0, cfg: SamplerConfig, kind: str, stream: np.random.Generator,
               with_seeds: bool = False) -> SamplerState:
    """Initial state: momentum ``~ N(0, M)`` and thermostat ``= c`` where used."""
    theta = as_theta(theta0)
    state = SamplerState(theta=theta)
    if kind in ("sghmc", "sgnht"):
        state.momentum = stream.standard_normal(theta.size) / np.sqrt(cfg.inv_mass(theta.size))
    if kind == "sgnht":
        state.thermostat = float(cfg.friction_c)
    if with_seeds:
        state.seeds = draw_seed_vector(cfg.n_seeds, stream)
    return state


@dataclass
class ABCChain:
    """An ABC chain ready to run: initial state, kernel, and optional seed flip."""

    initial: SamplerState
    kernel: Callable
    flip: Callable | None
    kind: str

    def run(self, num_steps: int, thinning: int = 1) -> tuple[ChainTrace, SamplerState]:
        return run_chain(self.initial, self.kernel, num_steps, thinning, self.flip, tag=self.kind)


def make_abc_chain(kind: str, sim, y, eps, cfg: SamplerConfig, theta0, master_seed: int,
                   chain_index: int = 0, proposal_std=None, likelihood=None,
                   flip_per_seed: bool = False) -> ABCChain:
    """Wire a simulator problem to one of the ABC kernels.

    The chain stream is substream ``2 * chain_index`` of ``master_seed`` and
    SPSA masks use substream ``2 * chain_index + 1``.
    """
    if kind not in ("abc_mcmc",) + tuple(_SGHD):
        raise ValueError(f"unknown ABC kernel {kind!r}; choose from abc_mcmc, sgld, sghmc, sgnht")
    stream = derive_stream(master_seed, 2 * chain_index)
    mask_stream = derive_stream(master_seed, 2 * chain_index + 1)
    y = np.atleast_1d(np.asarray(y, dtype=float))
    eps = np.broadcast_to(np.asarray(eps, dtype=float), y.shape)
    likelihood = Likelihood(likelihood or cfg.grad_cfg.likelihood)
    persistent = cfg.persistent_seeds

    if kind == "abc_mcmc":
        state = init_state(theta0, cfg, kind, stream, with_seeds=True)
        std = cfg.eta if proposal_std is None else proposal_std
        kernel = partial(abc_mcmc_step, sim=sim, y=y, eps=eps, prior=sim.spec.prior, proposal_std=std,
                         likelihood=likelihood, stream=stream, persistent_seeds=persistent)
    else:
        state = init_state(theta0, cfg, kind, stream, with_seeds=persistent)
        if cfg.grad_cfg.method is Method.EXACT:
            raise ValueError("ABC chains need an FDSA or SPSA gradient")
        oracle = ABCGradient(sim, y, eps, cfg.grad_cfg, cfg.n_seeds, mask_stream)
        kernel = partial(_SGHD[kind], grad_fn=oracle, cfg=cfg, stream=stream)

    flip = None
    if persistent:
        flip = partial(seed_flip_step, sim=sim, y=y, eps=eps, gamma=cfg.gamma, stream=stream,
                       likelihood=likelihood, per_seed=flip_per_seed)
    return ABCChain(state, _positional(kernel), _positional(flip) if flip else None, kind)


def _positional(fn: partial) -> Callable:
    return lambda state: fn(state)


def make_gradient_chain(kind: str, grad_fn, cfg: SamplerConfig, theta0, stream: np.random.Generator,
                        leapfrog_steps: int = 10) -> tuple[SamplerState, Callable]:
    """Initial state and kernel for a chain driven by a non-simulator oracle."""
    state = init_state(theta0, cfg, kind, stream)
    if kind == "hmc":
        return state, lambda s: hmc_reference_step(s, grad_fn, cfg, leapfrog_steps, stream)
    step = _SGHD[kind]
    return state, lambda s: step(s, grad_fn, cfg, stream)
