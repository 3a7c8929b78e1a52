"""Shared types, seed-keyed random streams and independent-component priors.

Parameter, seed and summary vectors are plain numpy arrays; the helpers in
this module validate them at the boundaries where shapes matter.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import special

SEED_DTYPE = np.uint64


class ShapeError(ValueError):
    """Raised when array dimensions do not match what a model expects."""


class DomainError(ValueError):
    """Raised when a value lies outside the domain of a function."""


def derive_stream(seed: int, substream: int = 0) -> np.random.Generator:
    """Return the deterministic random stream keyed by ``(seed, substream)``.

    The stream is a Philox counter-based generator whose 128-bit key packs
    the 64-bit seed in the low word and the substream index in the high word,
    so distinct pairs give independent, non-overlapping sequences and no
    global state is touched.
    """
    seed = int(seed)
    substream = int(substream)
    if not (0 <= seed < 2**64 and 0 <= substream < 2**64):
        raise DomainError("seed and substream must be unsigned 64-bit integers")
    return np.random.Generator(np.random.Philox(key=seed | (substream << 64)))


def draw_seed_vector(count: int, stream: np.random.Generator) -> np.ndarray:
    """Draw ``count`` seeds uniformly from the unsigned 64-bit range."""
    if count < 1:
        raise DomainError("seed count must be >= 1")
    return stream.integers(0, 2**64, size=count, dtype=SEED_DTYPE)


def as_theta(theta, dim: int | None = None) -> np.ndarray:
    """Coerce to a finite 1-d float array, optionally checking its length."""
    arr = np.atleast_1d(np.asarray(theta, dtype=float))
    if arr.ndim != 1:
        raise ShapeError(f"parameter vector must be 1-d, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise ShapeError(f"expected {dim} parameters, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise DomainError("parameter vector has non-finite entries")
    return arr


def as_epsilon(eps, dim: int) -> np.ndarray:
    """Broadcast a scalar or per-statistic kernel width to shape ``(dim,)``."""
    arr = np.broadcast_to(np.asarray(eps, dtype=float), (dim,)).copy()
    if not np.all(arr > 0):
        raise DomainError("every epsilon entry must be > 0")
    return arr


# --------------------------------------------------------------------------
# Univariate prior families
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Gamma:
    """Gamma distribution with shape ``alpha`` and rate ``beta``."""

    alpha: float
    beta: float
    family = "gamma"

    def logpdf(self, x: float) -> float:
        if x <= 0:
            return -np.inf
        a, b = self.alpha, self.beta
        return a * np.log(b) - special.gammaln(a) + (a - 1) * np.log(x) - b * x

    def grad_logpdf(self, x: float) -> float:
        if x <= 0:
            raise DomainError(f"gamma gradient undefined at {x}")
        return (self.alpha - 1) / x - self.beta


@dataclass(frozen=True)
class LogNormal:
    """Log-normal distribution; ``mu`` and ``sigma`` act on ``log x``."""

    mu: float
    sigma: float
    family = "lognormal"

    def logpdf(self, x: float) -> float:
        if x <= 0:
            return -np.inf
        z = (np.log(x) - self.mu) / self.sigma
        return -0.5 * z * z - np.log(x * self.sigma) - 0.5 * np.log(2 * np.pi)

    def grad_logpdf(self, x: float) -> float:
        if x <= 0:
            raise DomainError(f"log-normal gradient undefined at {x}")
        return -(1.0 + (np.log(x) - self.mu) / self.sigma**2) / x


@dataclass(frozen=True)
class Normal:
    mu: float = 0.0
    sigma: float = 1.0
    family = "normal"

    def logpdf(self, x: float) -> float:
        z = (x - self.mu) / self.sigma
        return -0.5 * z * z - np.log(self.sigma) - 0.5 * np.log(2 * np.pi)

    def grad_logpdf(self, x: float) -> float:
        return -(x - self.mu) / self.sigma**2


@dataclass(frozen=True)
class Poisson:
    """Poisson prior for an integer quantity carried as a continuous value.

    The density is evaluated at ``round(x)``; the gradient comes from the
    continuous interpolation ``x log(rate) - rate - lgamma(x + 1)``.
    """

    rate: float
    family = "poisson"

    def logpdf(self, x: float) -> float:
        k = np.round(x)
        if k < 0:
            return -np.inf
        return k * np.log(self.rate) - self.rate - special.gammaln(k + 1)

    def grad_logpdf(self, x: float) -> float:
        if x <= 0:
            raise DomainError(f"poisson surrogate gradient undefined at {x}")
        return np.log(self.rate) - special.digamma(x + 1)


@dataclass(frozen=True)
class Uniform:
    """Uniform on the half-open interval ``[low, high)``."""

    low: float
    high: float
    family = "uniform"

    def logpdf(self, x: float) -> float:
        if self.low <= x < self.high:
            return -np.log(self.high - self.low)
        return -np.inf

    def grad_logpdf(self, x: float) -> float:
        if not self.low < x < self.high:
            raise DomainError(f"uniform gradient undefined at {x}")
        return 0.0


FAMILIES = {cls.family: cls for cls in (Gamma, LogNormal, Normal, Poisson, Uniform)}


@dataclass(frozen=True)
class PriorSpec:
    """Product of independent univariate priors, one per parameter."""

    components: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        if not self.components:
            raise ShapeError("a prior needs at least one component")

    @property
    def dim(self) -> int:
        return len(self.components)

    def logpdf(self, theta) -> float:
        return prior_logpdf(self, theta)

    def grad_logpdf(self, theta) -> np.ndarray:
        return prior_grad_logpdf(self, theta)

    def to_dict(self) -> list[dict]:
        out = []
        for c in self.components:
            d = {"family": c.family}
            d.update({k: float(v) for k, v in c.__dict__.items()})
            out.append(d)
        return out

    @classmethod
    def from_dict(cls, items: Sequence[dict]) -> "PriorSpec":
        comps = []
        for item in items:
            item = dict(item)
            family = item.pop("family")
            if family not in FAMILIES:
                raise ValueError(f"unknown prior family {family!r}")
            comps.append(FAMILIES[family](**item))
        return cls(tuple(comps))


def prior_logpdf(prior: PriorSpec, theta) -> float:
    """Log prior density; ``-inf`` outside the support."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if theta.shape != (prior.dim,):
        raise ShapeError(f"prior has {prior.dim} components, theta has shape {theta.shape}")
    total = 0.0
    for comp, x in zip(prior.components, theta):
        lp = comp.logpdf(float(x))
        if lp == -np.inf:
            return -np.inf
        total += lp
    return float(total)


def prior_grad_logpdf(prior: PriorSpec, theta) -> np.ndarray:
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if theta.shape != (prior.dim,):
        raise ShapeError(f"prior has {prior.dim} components, theta has shape {theta.shape}")
    return np.array([c.grad_logpdf(float(x)) for c, x in zip(prior.components, theta)])


@dataclass(frozen=True)
class SimulatorSpec:
    name: str
    param_dim: int
    stat_dim: int
    prior: PriorSpec

    def __post_init__(self):
        if self.param_dim < 1 or self.stat_dim < 1:
            raise ShapeError("param_dim and stat_dim must be >= 1")
        if self.prior.dim != self.param_dim:
            raise ShapeError("prior dimension does not match param_dim")
