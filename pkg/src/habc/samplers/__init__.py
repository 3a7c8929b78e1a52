"""Markov chain kernels and the chain runner."""
from habc.samplers.chain import (KERNELS, ABCChain, ChainFailure, Recorder, init_state, make_abc_chain,
                                 make_gradient_chain, run_chain)
from habc.samplers.mcmc import abc_mcmc_step, hmc_reference_step, leapfrog, seed_flip_step
from habc.samplers.sghd import DivergenceError, sghmc_step, sgld_step, sgnht_step
from habc.samplers.state import SamplerConfig, SamplerState

__all__ = [
    "KERNELS", "ABCChain", "ChainFailure", "Recorder", "init_state", "make_abc_chain", "make_gradient_chain",
    "run_chain", "abc_mcmc_step", "hmc_reference_step", "leapfrog", "seed_flip_step",
    "DivergenceError", "sghmc_step", "sgld_step", "sgnht_step", "SamplerConfig", "SamplerState",
]
