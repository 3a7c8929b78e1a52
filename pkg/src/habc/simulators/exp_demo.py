"""One-dimensional demonstration problem: the mean of N exponential variates.

``theta`` is the exponential *rate*, so a replicate is
``x = mean(u_1..u_N) / theta`` with ``u_i`` unit exponentials drawn from the
seed's stream. For a fixed seed the output is smooth in ``theta`` and across
seeds ``x ~ Gamma(N, rate=N * theta)``. With a ``Gamma(alpha, beta)`` prior
the posterior given an observed mean ``y`` is ``Gamma(alpha + N, beta + N y)``.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy import stats

from habc.core import DomainError, Gamma, PriorSpec, SimulatorSpec, as_theta, derive_stream
from habc.simulators.base import Simulator

N_OBS = 20
THETA_TRUE = 0.15
Y_OBS = 7.74


@lru_cache(maxsize=65536)
def _unit_mean(seed: int, n: int) -> float:
    return float(derive_stream(seed, 0).standard_exponential(n).mean())


def exp_demo_simulate(theta: float, seed, n: int = N_OBS) -> np.ndarray:
    theta = float(np.asarray(theta).reshape(-1)[0])
    if not theta > 0:
        raise DomainError(f"exponential rate must be > 0, got {theta}")
    return np.array([_unit_mean(int(seed), n) / theta])


def exp_demo_true_posterior(alpha: float, beta: float, y: float, n: int = N_OBS):
    """Frozen scipy gamma posterior ``Gamma(alpha + n, rate=beta + n*y)``."""
    if n > 0 and not y > 0:
        raise DomainError("observed mean must be > 0")
    return stats.gamma(alpha + n, scale=1.0 / (beta + n * y))


class ExpDemoSimulator(Simulator):
    def __init__(self, alpha: float = 0.1, beta: float = 0.1, n: int = N_OBS):
        self.n = n
        self.alpha = alpha
        self.beta = beta
        self.spec = SimulatorSpec("exp_demo", 1, 1, PriorSpec((Gamma(alpha, beta),)))

    def simulate(self, theta, seed) -> np.ndarray:
        return exp_demo_simulate(theta, seed, self.n)

    def in_domain(self, theta) -> bool:
        return bool(np.asarray(theta).reshape(-1)[0] > 0)

    def simulate_batch(self, theta, seeds) -> np.ndarray:
        theta = as_theta(theta, 1)[0]
        if not theta > 0:
            raise DomainError(f"exponential rate must be > 0, got {theta}")
        units = np.array([_unit_mean(int(s), self.n) for s in seeds])
        return (units / theta)[:, None]

    def posterior(self, y: float = Y_OBS):
        return exp_demo_true_posterior(self.alpha, self.beta, y, self.n)

    def theta_map(self, y: float = Y_OBS) -> float:
        """Mode of the analytic posterior."""
        return (self.alpha + self.n - 1) / (self.beta + self.n * y)
