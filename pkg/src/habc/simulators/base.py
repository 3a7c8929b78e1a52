from __future__ import annotations

import numpy as np

from habc.core import SimulatorSpec, as_theta


class Simulator:
    """A simulator as a deterministic function ``x = f(theta, seed)``.

    Subclasses implement :meth:`simulate`. The output for a given
    ``(theta, seed)`` pair must be bit-identical across calls; a replicate
    with any non-finite statistic is *degenerate*.
    """

    spec: SimulatorSpec

    def simulate(self, theta, seed) -> np.ndarray:
        raise NotImplementedError

    def in_domain(self, theta) -> bool:
        """Whether ``theta`` can be simulated at all."""
        return True

    def simulate_batch(self, theta, seeds) -> np.ndarray:
        """Simulate one replicate per seed, returning shape ``(S, J)``."""
        theta = as_theta(theta, self.spec.param_dim)
        out = np.empty((len(seeds), self.spec.stat_dim))
        for s, seed in enumerate(seeds):
            out[s] = self.simulate(theta, seed)
        return out


def degenerate_mask(outputs: np.ndarray) -> np.ndarray:
    """Flag replicates (rows) that contain non-finite statistics."""
    return ~np.all(np.isfinite(np.atleast_2d(outputs)), axis=1)
