"""A simulator small enough that its ABC target can be normalized by brute force.

``theta`` lives on ``[0, G)`` under a uniform prior and only its integer bin
matters; each seed maps to one of ``K`` outcomes via ``seed % K``. Outputs are
read from a ``(G, K)`` lookup table. Every target the samplers should leave
invariant can then be enumerated exactly over bins and seed outcomes.
"""
from __future__ import annotations

import itertools

import numpy as np
from scipy.special import logsumexp

from habc.core import PriorSpec, SimulatorSpec, Uniform
from habc.likelihoods import loglik
from habc.simulators.base import Simulator

DEFAULT_TABLE = np.array([
    [0.0, 1.5, 3.0],
    [0.5, 1.0, 2.0],
    [1.0, 1.2, 0.2],
    [2.5, 0.8, 1.9],
])


class EnumerableToySimulator(Simulator):
    def __init__(self, table=DEFAULT_TABLE):
        self.table = np.asarray(table, dtype=float)
        self.n_bins, self.n_outcomes = self.table.shape
        prior = PriorSpec((Uniform(0.0, float(self.n_bins)),))
        self.spec = SimulatorSpec("toy", 1, 1, prior)

    def outcome(self, seed) -> int:
        return int(seed) % self.n_outcomes

    def in_domain(self, theta) -> bool:
        return bool(0 <= np.asarray(theta).reshape(-1)[0] < self.n_bins)

    def simulate(self, theta, seed) -> np.ndarray:
        b = int(np.floor(np.asarray(theta).reshape(-1)[0]))
        return self.table[b, self.outcome(seed)][None]

    def simulate_batch(self, theta, seeds) -> np.ndarray:
        b = int(np.floor(np.asarray(theta).reshape(-1)[0]))
        return self.table[b, np.asarray(seeds) % np.uint64(self.n_outcomes)][:, None]

    def outcome_tuples(self, n_seeds: int):
        return list(itertools.product(range(self.n_outcomes), repeat=n_seeds))

    def enumerate_joint(self, y, eps, n_seeds: int, kind: str = "kernel") -> np.ndarray:
        """Exact target over ``(bin, outcome tuple)``; shape ``(G, K**S)``."""
        tuples = self.outcome_tuples(n_seeds)
        logp = np.array([[loglik(kind, self.table[g, list(w)][:, None], y, eps) for w in tuples]
                         for g in range(self.n_bins)])
        return np.exp(logp - logsumexp(logp))

    def enumerate_theta(self, y, eps, n_seeds: int, kind: str = "kernel") -> np.ndarray:
        """Exact marginal bin probabilities of the pseudo-marginal target."""
        return self.enumerate_joint(y, eps, n_seeds, kind).sum(axis=1)

    def enumerate_seeds(self, theta_bin: int, y, eps, n_seeds: int, kind: str = "kernel") -> np.ndarray:
        """Exact conditional over outcome tuples at a fixed bin."""
        joint = self.enumerate_joint(y, eps, n_seeds, kind)[theta_bin]
        return joint / joint.sum()

    def tuple_index(self, seeds) -> int:
        idx = 0
        for s in seeds:
            idx = idx * self.n_outcomes + self.outcome(s)
        return idx
