"""Sheep blowfly population model with ten summary statistics.

The population follows the discrete-time stochastic recursion

    N[t+1] = P * N[t-tau] * exp(-N[t-tau] / N0) * e[t] + N[t] * exp(-delta * eps[t])

with ``e ~ Gamma(1/sp^2, rate 1/sp^2)`` and ``eps ~ Gamma(1/sd^2, rate 1/sd^2)``.
Gamma noise comes from inverse-CDF transforms of a fixed ``(T, 2)`` block of
uniforms per seed, so every parameter value consumes the same stream and
outputs change smoothly with the parameters under a fixed seed.

Parameters are ``[log P, log delta, log N0, log sd, log sp, tau]`` with
``tau`` a continuous relaxation of the integer lag.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources

import numpy as np
from scipy import special

from habc.core import DomainError, Normal, Poisson, PriorSpec, SimulatorSpec, as_theta, derive_stream
from habc.simulators.base import Simulator

PARAM_NAMES = ("log_P", "log_delta", "log_N0", "log_sigma_d", "log_sigma_p", "tau")
THETA_TRUE = np.array([np.log(29.0), np.log(0.2), np.log(260.0), np.log(0.6), np.log(0.3), 7.0])
OBS_SEED = 20150101
EPSILON = np.array([0.5, 0.5, 0.5, 0.5, 0.25, 0.25, 0.25, 0.25, 0.75, 0.75])

# Above this shape the gamma noise is within 1e-6 of 1 and gammaincinv is skipped.
_DEGENERATE_SHAPE = 1e14


@dataclass(frozen=True)
class BlowflyParams:
    log_P: float
    log_delta: float
    log_N0: float
    log_sigma_d: float
    log_sigma_p: float
    tau: float

    def __post_init__(self):
        if not self.tau > 0:
            raise DomainError("tau must be > 0")

    @classmethod
    def from_vector(cls, theta) -> "BlowflyParams":
        return cls(*map(float, as_theta(theta, 6)))

    def to_vector(self) -> np.ndarray:
        return np.array([self.log_P, self.log_delta, self.log_N0,
                         self.log_sigma_d, self.log_sigma_p, self.tau])

    @property
    def lag(self) -> int:
        return max(1, int(np.round(self.tau)))


def gamma_unit_noise(u: np.ndarray, sigma: float) -> np.ndarray:
    """Mean-one gamma variates with shape ``1/sigma^2`` from uniforms ``u``."""
    k = 1.0 / (sigma * sigma)
    if k > _DEGENERATE_SHAPE:
        return np.ones_like(u)
    return special.gammaincinv(k, u) / k


def population_series(params: BlowflyParams, seed, horizon: int = 200, burnin: int = 50,
                      n_init: float = 180.0) -> np.ndarray:
    """Run the recursion and return the ``horizon`` post-burn-in populations."""
    lag = params.lag
    if not horizon > burnin > lag:
        raise DomainError(f"need horizon > burnin > lag, got {horizon}, {burnin}, {lag}")
    steps = burnin + horizon
    u = derive_stream(int(seed), 0).random((steps, 2))
    e = gamma_unit_noise(u[:, 0], np.exp(params.log_sigma_p))
    eps = gamma_unit_noise(u[:, 1], np.exp(params.log_sigma_d))
    P, N0 = float(np.exp(params.log_P)), float(np.exp(params.log_N0))
    birth = (P * e).tolist()
    survive = np.exp(-np.exp(params.log_delta) * eps).tolist()

    n = [float(n_init)] * (lag + 1)
    exp = math.exp
    for t in range(steps):
        past = n[t]
        n.append(birth[t] * past * exp(-past / N0) + n[-1] * survive[t])
    return np.array(n[lag + 1 + burnin:])


@dataclass(frozen=True)
class BlowflyStatistics:
    """Statistic configuration: quantile groups and peak thresholds.

    ``thresholds`` are absolute population levels; by default they are the
    60% and 90% quantiles of the observed series.
    """

    thresholds: tuple = (0.0, 0.0)
    n_groups: int = 4

    @classmethod
    def from_series(cls, series, levels=(0.6, 0.9)) -> "BlowflyStatistics":
        return cls(tuple(float(np.quantile(series, q)) for q in levels))

    def __call__(self, series: np.ndarray) -> np.ndarray:
        return blowfly_statistics(series, self.thresholds, self.n_groups)


def _group_means(values: np.ndarray, n_groups: int) -> np.ndarray:
    # same group boundaries as np.array_split
    n = len(values)
    sizes = np.full(n_groups, n // n_groups)
    sizes[: n % n_groups] += 1
    starts = np.concatenate(([0], np.cumsum(sizes)[:-1]))
    return np.add.reduceat(np.sort(values), starts) / sizes


def count_peaks(series: np.ndarray, threshold: float) -> int:
    """Number of local maxima strictly above ``threshold``."""
    mid = series[1:-1]
    peaks = (mid > series[:-2]) & (mid >= series[2:]) & (mid > threshold)
    return int(peaks.sum())


def blowfly_statistics(series: np.ndarray, thresholds, n_groups: int = 4) -> np.ndarray:
    """The ten statistics of a population series.

    Log of the mean of each quartile group of ``N/1000``, mean of each
    quartile group of the first differences of ``N/1000``, and the peak
    counts above each threshold. Any non-finite or non-positive population
    yields an all-NaN (degenerate) vector.
    """
    series = np.asarray(series, dtype=float)
    out = np.full(2 * n_groups + len(thresholds), np.nan)
    if not np.all(np.isfinite(series)) or np.any(series < 0):
        return out
    scaled = series / 1000.0
    with np.errstate(divide="ignore"):
        out[:n_groups] = np.log(_group_means(scaled, n_groups))
    out[n_groups:2 * n_groups] = _group_means(np.diff(scaled), n_groups)
    out[2 * n_groups:] = [count_peaks(series, th) for th in thresholds]
    if not np.all(np.isfinite(out)):
        out[:] = np.nan
    return out


def load_series(path=None) -> np.ndarray:
    """Read a one-value-per-line population series (bundled one by default)."""
    if path is None:
        path = resources.files("habc.simulators") / "data" / "blowfly_observed.csv"
    with open(path) as fh:
        return np.array([float(line) for line in fh if line.strip()])


def default_prior(log_scale_sd: float = 2.0, tau_rate: float = 7.0) -> PriorSpec:
    comps = [Normal(0.0, log_scale_sd) for _ in range(5)]
    return PriorSpec(tuple(comps) + (Poisson(tau_rate),))


class BlowflySimulator(Simulator):
    def __init__(self, statistics: BlowflyStatistics | None = None, prior: PriorSpec | None = None,
                 horizon: int = 200, burnin: int = 50, n_init: float = 180.0):
        if statistics is None:
            statistics = BlowflyStatistics.from_series(load_series())
        self.statistics = statistics
        self.horizon = horizon
        self.burnin = burnin
        self.n_init = n_init
        stat_dim = 2 * statistics.n_groups + len(statistics.thresholds)
        self.spec = SimulatorSpec("blowfly", 6, stat_dim, prior or default_prior())

    def in_domain(self, theta) -> bool:
        theta = np.asarray(theta, dtype=float)
        return bool(np.all(np.isfinite(theta)) and theta[5] > 0
                    and max(1, int(np.round(theta[5]))) < self.burnin)

    def series(self, theta, seed) -> np.ndarray:
        return population_series(BlowflyParams.from_vector(theta), seed,
                                 self.horizon, self.burnin, self.n_init)

    def simulate(self, theta, seed) -> np.ndarray:
        return self.statistics(self.series(theta, seed))

    def observed(self) -> np.ndarray:
        """Statistics of the bundled observed series."""
        return self.statistics(load_series())


def blowfly_simulate(params: BlowflyParams, seed, horizon: int = 200, burnin: int = 50,
                     statistics: BlowflyStatistics | None = None) -> np.ndarray:
    if statistics is None:
        statistics = BlowflyStatistics.from_series(load_series())
    return statistics(population_series(params, seed, horizon, burnin))
