import numpy as np

from habc.core import Normal, PriorSpec, SimulatorSpec, derive_stream
from habc.simulators import Simulator


class LinearGaussian(Simulator):
    """``x = A theta + z(seed)``: the synthetic log-likelihood is quadratic in theta."""

    def __init__(self, A):
        self.A = np.asarray(A, dtype=float)
        J, D = self.A.shape
        self.spec = SimulatorSpec("linear", D, J, PriorSpec(tuple(Normal(0.0, 2.0) for _ in range(D))))

    def simulate(self, theta, seed):
        return self.A @ np.asarray(theta, dtype=float) + derive_stream(int(seed), 0).standard_normal(self.A.shape[0])
