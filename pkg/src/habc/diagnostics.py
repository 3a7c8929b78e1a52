"""Chain traces and the quantitative checks run on them."""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, stats

from habc.core import ShapeError, derive_stream, prior_grad_logpdf


@dataclass
class ChainTrace:
    samples: np.ndarray
    steps: np.ndarray
    sim_calls: int = 0
    kernel: str = ""
    config: dict = field(default_factory=dict)
    invalid_grads: int = 0
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.ndim == 1:
            self.samples = self.samples[:, None]
        self.steps = np.asarray(self.steps, dtype=int)

    def __len__(self) -> int:
        return self.samples.shape[0]

    def discard(self, fraction: float) -> "ChainTrace":
        """Drop the leading ``fraction`` of retained samples (burn-in)."""
        k = int(np.floor(fraction * len(self)))
        return ChainTrace(self.samples[k:], self.steps[k:], self.sim_calls, self.kernel,
                          self.config, self.invalid_grads, self.extras)

    def write_csv(self, path):
        """``step,theta_0,...,theta_{D-1}`` rows, shortest round-trip floats."""
        dim = self.samples.shape[1]
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(",".join(["step"] + [f"theta_{d}" for d in range(dim)]) + "\n")
            for step, row in zip(self.steps, self.samples):
                fh.write(",".join([str(int(step))] + [repr(float(v)) for v in row]) + "\n")


def read_trace_csv(path) -> ChainTrace:
    with open(path, encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    body = np.array(rows[1:], dtype=float).reshape(len(rows) - 1, len(rows[0]))
    return ChainTrace(body[:, 1:], body[:, 0].astype(int))


def _samples(trace) -> np.ndarray:
    s = trace.samples if isinstance(trace, ChainTrace) else np.asarray(trace, dtype=float)
    return s[:, None] if s.ndim == 1 else s


# --------------------------------------------------------------------------
# Total variational distance
# --------------------------------------------------------------------------


def equal_probability_edges(posterior, bins: int = 100) -> np.ndarray:
    """Bin edges splitting the posterior into ``bins`` equal-mass cells."""
    return posterior.ppf(np.linspace(0.0, 1.0, bins + 1))


def tvd_vs_analytic(trace, posterior, edges) -> float:
    """Half the L1 distance between the trace histogram and exact bin masses.

    ``edges`` may start at ``-inf``/support edge and end at ``+inf``; samples
    outside ``[edges[0], edges[-1]]`` form an implicit extra bin whose
    exact mass is whatever the edges do not cover.
    """
    x = _samples(trace)
    if x.shape[0] == 0:
        raise ValueError("cannot compute TVD of an empty trace")
    if x.shape[1] != 1:
        raise ShapeError("TVD against an analytic posterior needs a 1-d trace")
    x = x[:, 0]
    edges = np.asarray(edges, dtype=float)
    cdf = posterior.cdf(edges)
    p = np.diff(cdf)
    p_out = 1.0 - (cdf[-1] - cdf[0])
    idx = np.searchsorted(edges, x, side="right") - 1
    inside = (idx >= 0) & (idx < len(p)) & (x <= edges[-1])
    counts = np.bincount(idx[inside], minlength=len(p))[: len(p)]
    p_hat = counts / x.size
    p_hat_out = 1.0 - inside.mean()
    return float(0.5 * (np.abs(p_hat - p).sum() + abs(p_hat_out - p_out)))


def mean_tvd(traces, posterior, edges, burn_in: float = 0.1) -> tuple[float, list[float]]:
    """Average of per-chain TVDs after discarding a burn-in fraction."""
    values = [tvd_vs_analytic(t.discard(burn_in), posterior, edges) for t in traces]
    return float(np.mean(values)), values


# --------------------------------------------------------------------------
# Gradient study
# --------------------------------------------------------------------------


def exp_demo_sl_limit_gradient(theta: float, y: float, eps: float, n: int, prior, h: float = 1e-6) -> float:
    """Infinite-replicate synthetic-likelihood ``grad U`` for the exponential demo.

    The mean and variance of the replicate law ``Gamma(n, rate=n*theta)``
    are obtained by numerical integration of its density, plugged into the
    Gaussian likelihood ``N(y | mu, var + eps^2)``, and differentiated by
    central differences.
    """
    def loglik(t):
        law = stats.gamma(n, scale=1.0 / (n * t))
        upper = law.ppf(1 - 1e-15)
        mu = integrate.quad(lambda x: x * law.pdf(x), 0, upper, epsabs=1e-13, epsrel=1e-12, limit=200)[0]
        var = integrate.quad(lambda x: (x - mu) ** 2 * law.pdf(x), 0, upper,
                             epsabs=1e-13, epsrel=1e-12, limit=200)[0]
        v = var + eps * eps
        return -0.5 * np.log(2 * np.pi * v) - (y - mu) ** 2 / (2 * v)

    d_lik = (loglik(theta + h) - loglik(theta - h)) / (2 * h)
    return float(-(d_lik + prior_grad_logpdf(prior, [theta])[0]))


def gradient_report(rows, reference: float | None = None) -> dict:
    """Tabulate probe results.

    ``rows`` are mappings with keys ``likelihood``, ``S``, ``mean`` and
    ``sd`` (scalars or 1-element arrays).
    """
    table = []
    for r in rows:
        table.append({
            "likelihood": str(r["likelihood"]),
            "S": int(r["S"]),
            "mean": float(np.ravel(r["mean"])[0]),
            "sd": float(np.ravel(r["sd"])[0]),
        })
    return {"rows": table, "sl_limit_reference": None if reference is None else float(reference)}


def format_gradient_report(report: dict) -> str:
    lines = [f"{'likelihood':<12}{'S':>5}{'mean':>10}{'sd':>10}"]
    for r in report["rows"]:
        lines.append(f"{r['likelihood']:<12}{r['S']:>5}{r['mean']:>10.2f}{r['sd']:>10.2f}")
    if report.get("sl_limit_reference") is not None:
        lines.append(f"synthetic, S -> inf: {report['sl_limit_reference']:.2f}")
    return "\n".join(lines)


# --------------------------------------------------------------------------
# Trace statistics
# --------------------------------------------------------------------------


def increment_autocorr(trace, lag: int = 1) -> float:
    """Lag-``lag`` autocorrelation of first differences, averaged over coordinates."""
    x = _samples(trace)
    if x.shape[0] <= lag + 1:
        raise ValueError("trace too short for the requested lag")
    d = np.diff(x, axis=0)
    d = d - d.mean(axis=0)
    num = np.sum(d[lag:] * d[:-lag], axis=0)
    den = np.sum(d * d, axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        r = np.where(den > 0, num / np.where(den > 0, den, 1.0), np.nan)
    if np.all(np.isnan(r)):
        # constant increments: perfectly persistent
        return 1.0
    return float(np.nanmean(r))


def batch_means_se(values, n_batches: int = 50) -> float:
    """Standard error of the mean of a correlated series by batch means."""
    v = np.asarray(values, dtype=float)
    m = len(v) // n_batches
    means = v[: m * n_batches].reshape(n_batches, m).mean(axis=1)
    return float(means.std(ddof=1) / np.sqrt(n_batches))


# --------------------------------------------------------------------------
# Projections
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ProjectionMatrix:
    rows: np.ndarray
    seed: int | None = None

    @classmethod
    def from_seed(cls, dim: int, seed: int) -> "ProjectionMatrix":
        return cls(derive_stream(seed, 0).standard_normal((2, dim)), seed)


def project_2d(trace, projection: ProjectionMatrix, n_points: int | None = None) -> np.ndarray:
    """Project samples onto two dimensions, evenly sub-sampled to ``n_points``."""
    x = _samples(trace)
    rows = np.asarray(projection.rows, dtype=float)
    if rows.shape != (2, x.shape[1]):
        raise ShapeError(f"projection of shape {rows.shape} does not fit {x.shape[1]}-d samples")
    if n_points is not None and n_points < len(x):
        x = x[np.linspace(0, len(x) - 1, n_points).round().astype(int)]
    return x @ rows.T


# --------------------------------------------------------------------------
# Serialization
# --------------------------------------------------------------------------


def write_json(report: dict, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(report, fh, indent=2, sort_keys=True, default=_jsonable)
        fh.write("\n")


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def write_points_csv(points, path, header=("x", "y")):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in np.atleast_2d(points):
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def histogram_csv(trace, posterior, edges, path):
    """Trace histogram and exact bin masses side by side."""
    x = _samples(trace)[:, 0]
    edges = np.asarray(edges, dtype=float)
    counts = np.histogram(np.clip(x, edges[0], edges[-1]), bins=edges)[0] if np.all(np.isfinite(edges)) \
        else np.bincount(np.clip(np.searchsorted(edges, x, side="right") - 1, 0, len(edges) - 2),
                         minlength=len(edges) - 1)
    exact = np.diff(posterior.cdf(edges))
    rows = np.column_stack([edges[:-1], edges[1:], counts / max(len(x), 1), exact])
    write_points_csv(rows, path, header=("lo", "hi", "empirical", "exact"))
