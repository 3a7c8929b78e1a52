from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from habc.gradients import GradientConfig


@dataclass
class SamplerState:
    """Full Markov chain state plus running counters.

    ``replicates`` and ``loglik`` are the outputs at ``(theta, seeds)`` and
    their likelihood; either is ``None`` when not currently materialized.
    ``grad_mean``/``grad_var`` hold the running gradient-noise estimate used
    by SGHMC.
    """

    theta: np.ndarray
    momentum: np.ndarray | None = None
    thermostat: float | None = None
    seeds: np.ndarray | None = None
    replicates: np.ndarray | None = None
    loglik: float | None = None
    grad_mean: np.ndarray | None = None
    grad_var: np.ndarray | None = None
    step: int = 0
    sim_calls: int = 0
    invalid_grads: int = 0
    rejected_moves: int = 0
    accepted: int = 0
    flips_proposed: int = 0
    flips_accepted: int = 0

    def evolve(self, **changes) -> "SamplerState":
        return replace(self, **changes)


@dataclass(frozen=True)
class SamplerConfig:
    eta: float = 0.01
    friction_c: float = 1.0
    gamma: float = 0.1
    mass: float | tuple = 1.0
    persistent_seeds: bool = False
    n_seeds: int = 5
    grad_cfg: GradientConfig = field(default_factory=GradientConfig)
    vhat_decay: float = 0.99
    estimate_vhat: bool = True

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError("eta must be > 0")
        if self.friction_c < 0:
            raise ValueError("friction_c must be >= 0")
        if not 0 <= self.gamma <= 1:
            raise ValueError("gamma must lie in [0, 1]")
        if not 0 <= self.vhat_decay < 1:
            raise ValueError("vhat_decay must lie in [0, 1)")
        if not np.all(np.asarray(self.mass) > 0):
            raise ValueError("mass must be > 0")
        if self.n_seeds < 1:
            raise ValueError("n_seeds must be >= 1")

    def inv_mass(self, dim: int) -> np.ndarray:
        cached = self.__dict__.get("_inv_mass")
        if cached is None or cached.size != dim:
            cached = 1.0 / np.broadcast_to(np.asarray(self.mass, dtype=float), (dim,))
            cached.flags.writeable = False
            object.__setattr__(self, "_inv_mass", cached)
        return cached
