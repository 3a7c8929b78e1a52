"""Config-driven experiments: presets, chain orchestration, and output bundles.

A bundle directory holds ``trace_<chain>.csv`` per chain, ``diagnostics.json``
and ``config.resolved`` (the fully resolved YAML config). A config plus its
master seed determines every byte written; nothing time- or host-dependent
goes into a bundle.
"""
from __future__ import annotations

import dataclasses
import itertools
import logging
import os
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
import yaml

from habc.core import derive_stream
from habc.diagnostics import (equal_probability_edges, exp_demo_sl_limit_gradient, gradient_report,
                              increment_autocorr, tvd_vs_analytic, write_json)
from habc.gradients import AnalyticGradient, GradientConfig, Method, MinibatchGradient, gradient_variance_probe
from habc.likelihoods import Likelihood
from habc.samplers.chain import ChainFailure, make_abc_chain, make_gradient_chain, run_chain
from habc.samplers.state import SamplerConfig

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
OUT_DIR_ENV = "HABC_OUT_DIR"
SIMULATORS = ("exp_demo", "blowfly", "logreg", "toy")
ABC_KERNELS = ("abc_mcmc", "sgld", "sghmc", "sgnht")
GRADIENT_KERNELS = ("sgld", "sghmc", "sgnht", "hmc")


class ConfigError(ValueError):
    """Invalid configuration; ``path`` is the dotted location of the bad field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True)
class SimulatorSection:
    name: str = "exp_demo"
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SamplerSection:
    kind: str = "sgnht"
    eta: float = 0.01
    friction_c: float = 1.0
    gamma: float = 0.1
    mass: float | tuple = 1.0
    persistent_seeds: bool = True
    flip_per_seed: bool = False
    n_seeds: int = 5
    repeats: int = 1
    d_theta: float | tuple = 1e-3
    method: str = "spsa"
    proposal_std: float | tuple | None = None
    vhat_decay: float = 0.99
    leapfrog_steps: int = 10
    batch_size: int = 100


@dataclass(frozen=True)
class ProbeSection:
    trials: int = 10_000
    n_seeds: tuple = (5, 50)
    likelihoods: tuple = ("kernel", "synthetic")
    theta: float | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    name: str = "experiment"
    schema: int = SCHEMA_VERSION
    simulator: SimulatorSection = field(default_factory=SimulatorSection)
    likelihood: str = "synthetic"
    epsilon: float | tuple | None = None
    sampler: SamplerSection = field(default_factory=SamplerSection)
    initial: tuple | None = None
    steps: int = 10_000
    thinning: int = 1
    chains: int = 5
    master_seed: int = 0
    burn_in: float = 0.1
    tvd_bins: int = 100
    output_dir: str | None = None
    probe: ProbeSection | None = None

    def to_dict(self) -> dict:
        return _plain(dataclasses.asdict(self))

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False, default_flow_style=None)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        return validate(_build(cls, data, ""))

    @classmethod
    def from_yaml(cls, text: str) -> "ExperimentConfig":
        data = yaml.safe_load(text)
        if not isinstance(data, dict):
            raise ConfigError("<root>", "expected a mapping")
        return cls.from_dict(data)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        return cls.from_yaml(Path(path).read_text(encoding="utf-8"))

    def replace(self, **changes) -> "ExperimentConfig":
        return validate(dataclasses.replace(self, **changes))

    def with_sampler(self, **changes) -> "ExperimentConfig":
        return self.replace(sampler=dataclasses.replace(self.sampler, **changes))


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _tupled(value):
    return tuple(_tupled(v) for v in value) if isinstance(value, list) else value


_NESTED = {"simulator": SimulatorSection, "sampler": SamplerSection, "probe": ProbeSection}


def _build(cls, data, prefix: str):
    if not isinstance(data, dict):
        raise ConfigError(prefix or "<root>", "expected a mapping")
    names = {f.name for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in data.items():
        path = f"{prefix}.{key}" if prefix else key
        if key not in names:
            raise ConfigError(path, "unknown field")
        if key in _NESTED and value is not None:
            value = _build(_NESTED[key], value, path)
        elif key != "params":
            value = _tupled(value)
        kwargs[key] = value
    return cls(**kwargs)


def _check(ok: bool, path: str, message: str):
    if not ok:
        raise ConfigError(path, message)


def _positive(value) -> bool:
    try:
        return bool(np.all(np.asarray(value, dtype=float) > 0))
    except (TypeError, ValueError):
        return False


def validate(cfg: ExperimentConfig) -> ExperimentConfig:
    """Check every field, raising :class:`ConfigError` with the field path."""
    _check(cfg.schema == SCHEMA_VERSION, "schema", f"unsupported schema {cfg.schema!r} (expected {SCHEMA_VERSION})")
    _check(isinstance(cfg.simulator, SimulatorSection), "simulator", "expected a mapping")
    _check(cfg.simulator.name in SIMULATORS, "simulator.name", f"unknown simulator; choose from {', '.join(SIMULATORS)}")
    _check(isinstance(cfg.simulator.params, dict), "simulator.params", "expected a mapping")
    _check(cfg.likelihood in [k.value for k in Likelihood], "likelihood", "must be 'kernel' or 'synthetic'")
    _check(cfg.epsilon is None or _positive(cfg.epsilon), "epsilon", "entries must be > 0")
    for key in ("steps", "thinning", "chains", "master_seed", "tvd_bins"):
        value = getattr(cfg, key)
        _check(isinstance(value, int) and not isinstance(value, bool), key, "must be an integer")
    _check(cfg.steps >= 0, "steps", "must be >= 0")
    _check(cfg.thinning >= 1, "thinning", "must be >= 1")
    _check(cfg.chains >= 1, "chains", "must be >= 1")
    _check(0 <= cfg.master_seed < 2**64, "master_seed", "must lie in [0, 2^64)")
    _check(0 <= cfg.burn_in < 1, "burn_in", "must lie in [0, 1)")
    _check(cfg.tvd_bins >= 1, "tvd_bins", "must be >= 1")

    s = cfg.sampler
    _check(isinstance(s, SamplerSection), "sampler", "expected a mapping")
    kinds = GRADIENT_KERNELS if cfg.simulator.name == "logreg" else ABC_KERNELS
    _check(s.kind in kinds, "sampler.kind", f"choose from {', '.join(kinds)} for {cfg.simulator.name}")
    _check(_positive(s.eta), "sampler.eta", "must be > 0")
    _check(s.friction_c >= 0, "sampler.friction_c", "must be >= 0")
    _check(0 <= s.gamma <= 1, "sampler.gamma", "must lie in [0, 1]")
    _check(_positive(s.mass), "sampler.mass", "entries must be > 0")
    _check(_positive(s.d_theta), "sampler.d_theta", "entries must be > 0")
    _check(s.proposal_std is None or _positive(s.proposal_std), "sampler.proposal_std", "entries must be > 0")
    _check(isinstance(s.n_seeds, int) and s.n_seeds >= 1, "sampler.n_seeds", "must be an integer >= 1")
    _check(isinstance(s.repeats, int) and s.repeats >= 1, "sampler.repeats", "must be an integer >= 1")
    _check(s.method in [m.value for m in Method], "sampler.method", "must be 'fdsa', 'spsa' or 'exact'")
    _check(0 <= s.vhat_decay < 1, "sampler.vhat_decay", "must lie in [0, 1)")
    _check(isinstance(s.leapfrog_steps, int) and s.leapfrog_steps >= 0, "sampler.leapfrog_steps", "must be >= 0")
    _check(isinstance(s.flip_per_seed, bool), "sampler.flip_per_seed", "must be true or false")
    _check(isinstance(s.batch_size, int) and s.batch_size >= 1, "sampler.batch_size", "must be >= 1")
    if cfg.likelihood == "synthetic" and cfg.simulator.name != "logreg":
        _check(s.n_seeds >= 2, "sampler.n_seeds", "synthetic likelihood needs at least 2 seeds")
    if cfg.simulator.name != "logreg":
        _check(s.method != "exact", "sampler.method", "simulator-based problems need 'fdsa' or 'spsa'")

    if cfg.probe is not None:
        p = cfg.probe
        _check(isinstance(p, ProbeSection), "probe", "expected a mapping")
        _check(isinstance(p.trials, int) and p.trials >= 2, "probe.trials", "must be an integer >= 2")
        _check(all(isinstance(n, int) and n >= 1 for n in p.n_seeds), "probe.n_seeds", "entries must be integers >= 1")
        _check(all(k in ("kernel", "synthetic") for k in p.likelihoods), "probe.likelihoods",
               "entries must be 'kernel' or 'synthetic'")
    return cfg


# --------------------------------------------------------------------------
# Presets
# --------------------------------------------------------------------------


def _demo_table1() -> ExperimentConfig:
    return ExperimentConfig(
        name="demo-table1",
        simulator=SimulatorSection("exp_demo", {"alpha": 0.1, "beta": 0.1, "n": 20, "y": 7.74}),
        likelihood="synthetic", epsilon=0.37,
        sampler=SamplerSection(kind="sgnht", eta=0.01, friction_c=1.0, gamma=0.1, persistent_seeds=True,
                               n_seeds=5, repeats=1, d_theta=1e-3, method="spsa"),
        steps=10_000, chains=5, master_seed=2015,
    )


# step sizes that keep each kernel stable on the demo with S=5, R=1 SPSA gradients
DEMO_TUNED = {
    "abc_mcmc": {"proposal_std": 0.04},
    "sgld": {"eta": 0.015},
    "sghmc": {"eta": 0.01, "friction_c": 1.0},
    "sgnht": {"eta": 0.01, "friction_c": 1.0},
}


def demo_config(kind: str, persistent_seeds: bool = True) -> ExperimentConfig:
    """The demo-table1 preset re-targeted at one kernel with its tuned step size."""
    cfg = _demo_table1()
    return cfg.with_sampler(kind=kind, persistent_seeds=persistent_seeds, **DEMO_TUNED[kind])


def _demo_gradfig() -> ExperimentConfig:
    return ExperimentConfig(
        name="demo-gradfig",
        simulator=SimulatorSection("exp_demo", {"alpha": 0.1, "beta": 0.1, "n": 20, "y": 7.74}),
        likelihood="synthetic", epsilon=0.37,
        sampler=SamplerSection(kind="sgld", n_seeds=5, d_theta=1e-2, method="fdsa", persistent_seeds=False),
        steps=0, chains=1, master_seed=2015,
        probe=ProbeSection(trials=10_000, n_seeds=(5, 50), likelihoods=("kernel", "synthetic")),
    )


def _blowfly() -> ExperimentConfig:
    from habc.simulators.blowfly import EPSILON
    return ExperimentConfig(
        name="blowfly",
        simulator=SimulatorSection("blowfly", {"horizon": 200, "burnin": 50, "n_init": 180.0,
                                               "log_scale_sd": 2.0, "tau_rate": 7.0}),
        likelihood="synthetic", epsilon=tuple(float(e) for e in EPSILON),
        sampler=SamplerSection(kind="sgnht", eta=0.01, friction_c=1.0, gamma=0.1, persistent_seeds=True,
                               flip_per_seed=True, n_seeds=10, repeats=2,
                               d_theta=(0.05, 0.05, 0.05, 0.05, 0.05, 0.5), method="spsa"),
        steps=5_000, chains=1, master_seed=2015,
    )


def _logreg() -> ExperimentConfig:
    return ExperimentConfig(
        name="logreg",
        simulator=SimulatorSection("logreg", {"prior_sigma": 1.0, "map_steps": 5000}),
        likelihood="synthetic",
        sampler=SamplerSection(kind="sgld", eta=0.03, friction_c=1.0, persistent_seeds=False,
                               repeats=10, d_theta=1e-2, method="spsa", batch_size=100),
        steps=10_000, chains=1, master_seed=2015, thinning=10,
    )


PRESETS = {"demo-table1": _demo_table1, "demo-gradfig": _demo_gradfig, "blowfly": _blowfly, "logreg": _logreg}


def preset(name: str) -> ExperimentConfig:
    """The documented configuration for a named benchmark study."""
    try:
        return validate(PRESETS[name]())
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}") from None


# --------------------------------------------------------------------------
# Problems
# --------------------------------------------------------------------------


@dataclass
class Problem:
    """What a chain needs: a simulator or target, data, tolerances, a start point."""

    sim: object | None
    y: np.ndarray | None
    eps: np.ndarray | None
    theta0: np.ndarray
    posterior: object | None = None
    target: object | None = None


@lru_cache(maxsize=8)
def _logreg_problem(prior_sigma: float, map_steps: int, seed: int):
    from habc.simulators.logreg import LogisticRegressionTarget, sgd_map
    target = LogisticRegressionTarget.bundled(prior_sigma=prior_sigma)
    theta_map = sgd_map(target, derive_stream(seed, 2**32), steps=map_steps)
    theta_map.setflags(write=False)
    return target, theta_map


def build_problem(cfg: ExperimentConfig) -> Problem:
    params = dict(cfg.simulator.params)
    name = cfg.simulator.name
    try:
        if name == "exp_demo":
            from habc.simulators.exp_demo import N_OBS, Y_OBS, ExpDemoSimulator
            y = params.pop("y", Y_OBS)
            sim = ExpDemoSimulator(alpha=params.pop("alpha", 0.1), beta=params.pop("beta", 0.1),
                                   n=params.pop("n", N_OBS))
            theta0 = cfg.initial or [sim.theta_map(y)]
            problem = Problem(sim, np.array([y], dtype=float), _eps(cfg, 1, 0.37), np.asarray(theta0, float),
                              posterior=sim.posterior(y))
        elif name == "blowfly":
            from habc.simulators.blowfly import EPSILON, THETA_TRUE, BlowflySimulator, default_prior
            prior = default_prior(params.pop("log_scale_sd", 2.0), params.pop("tau_rate", 7.0))
            sim = BlowflySimulator(prior=prior, **{k: params.pop(k) for k in ("horizon", "burnin", "n_init")
                                                   if k in params})
            problem = Problem(sim, sim.observed(), _eps(cfg, 10, EPSILON),
                              np.asarray(cfg.initial or THETA_TRUE, float))
        elif name == "toy":
            from habc.simulators.toy import DEFAULT_TABLE, EnumerableToySimulator
            sim = EnumerableToySimulator(np.asarray(params.pop("table", DEFAULT_TABLE), dtype=float))
            y = params.pop("y", 1.0)
            problem = Problem(sim, np.array([y], dtype=float), _eps(cfg, 1, 0.5),
                              np.asarray(cfg.initial or [0.5], float))
        else:
            target, theta_map = _logreg_problem(float(params.pop("prior_sigma", 1.0)),
                                                int(params.pop("map_steps", 5000)), cfg.master_seed)
            problem = Problem(None, None, None, np.asarray(cfg.initial or theta_map, float), target=target)
    except TypeError as exc:
        raise ConfigError("simulator.params", str(exc)) from exc
    if params:
        raise ConfigError(f"simulator.params.{sorted(params)[0]}", f"unknown parameter for {name}")
    return problem


def _eps(cfg, dim, default) -> np.ndarray:
    eps = default if cfg.epsilon is None else cfg.epsilon
    eps = np.asarray(eps, dtype=float)
    if eps.ndim and eps.size != dim:
        raise ConfigError("epsilon", f"expected {dim} entries, got {eps.size}")
    return np.broadcast_to(eps, (dim,)).copy()


def sampler_config(cfg: ExperimentConfig) -> SamplerConfig:
    s = cfg.sampler
    return SamplerConfig(
        eta=s.eta, friction_c=s.friction_c, gamma=s.gamma, mass=s.mass,
        persistent_seeds=s.persistent_seeds, n_seeds=s.n_seeds, vhat_decay=s.vhat_decay,
        grad_cfg=GradientConfig(d_theta=s.d_theta, repeats=s.repeats, method=s.method,
                                likelihood=cfg.likelihood),
    )


# --------------------------------------------------------------------------
# Running
# --------------------------------------------------------------------------


@dataclass
class ChainResult:
    index: int
    trace: object
    summary: dict
    error: str | None = None


def _summary(state) -> dict:
    return {
        "steps": state.step,
        "rejected_moves": state.rejected_moves,
        "accepted": state.accepted,
        "flips_proposed": state.flips_proposed,
        "flips_accepted": state.flips_accepted,
    }


def run_one_chain(cfg: ExperimentConfig, index: int, problem: Problem | None = None) -> ChainResult:
    """Run chain ``index`` of ``cfg``; failures are captured, not raised."""
    problem = problem or build_problem(cfg)
    s = cfg.sampler
    scfg = sampler_config(cfg)
    if cfg.simulator.name == "logreg":
        stream = derive_stream(cfg.master_seed, 2 * index)
        target = problem.target
        if s.kind == "hmc":
            oracle = AnalyticGradient(lambda t: -target.loglik_and_grad(t)[0],
                                      lambda t: -target.loglik_and_grad(t)[1])
        else:
            oracle = MinibatchGradient(target, s.batch_size, derive_stream(cfg.master_seed, 2 * index + 1),
                                       method=s.method, d_theta=s.d_theta, repeats=s.repeats)
        initial, kernel = make_gradient_chain(s.kind, oracle, scfg, problem.theta0, stream, s.leapfrog_steps)
        flip = None
    else:
        chain = make_abc_chain(s.kind, problem.sim, problem.y, problem.eps, scfg, problem.theta0,
                               cfg.master_seed, index, proposal_std=s.proposal_std,
                               likelihood=cfg.likelihood, flip_per_seed=s.flip_per_seed)
        initial, kernel, flip = chain.initial, chain.kernel, chain.flip
    try:
        trace, state = run_chain(initial, kernel, cfg.steps, cfg.thinning, flip, tag=s.kind)
    except ChainFailure as exc:
        logger.error("chain %d failed: %s", index, exc)
        return ChainResult(index, exc.trace, _summary(exc.state), error=str(exc))
    return ChainResult(index, trace, _summary(state))


def run_chains(cfg: ExperimentConfig) -> list[ChainResult]:
    """Run every chain in memory, sequentially, in index order."""
    problem = build_problem(cfg)
    return [run_one_chain(cfg, i, problem) for i in range(cfg.chains)]


def chain_diagnostics(cfg: ExperimentConfig, result: ChainResult, problem: Problem) -> dict:
    trace = result.trace
    kept = trace.discard(cfg.burn_in)
    out = {"chain": result.index, "samples": len(trace), "sim_calls": int(trace.sim_calls),
           "invalid_grads": int(trace.invalid_grads), **result.summary,
           "sim_calls_per_step": trace.sim_calls / result.summary["steps"] if result.summary["steps"] else 0.0}
    if len(kept):
        out["mean"] = kept.samples.mean(axis=0)
        out["sd"] = kept.samples.std(axis=0)
    if len(kept) > 2:
        out["increment_autocorr"] = increment_autocorr(kept)
    if problem.posterior is not None and len(kept):
        edges = equal_probability_edges(problem.posterior, cfg.tvd_bins)
        out["tvd"] = tvd_vs_analytic(kept, problem.posterior, edges)
    if "kinetic" in trace.extras and len(trace.extras["kinetic"]):
        out["mean_kinetic"] = float(np.mean(trace.extras["kinetic"]))
    if "thermostat" in trace.extras and len(trace.extras["thermostat"]):
        out["final_thermostat"] = float(trace.extras["thermostat"][-1])
    if result.error:
        out["error"] = result.error
    return out


def summarize(cfg: ExperimentConfig, results: list[ChainResult], problem: Problem) -> dict:
    chains = [chain_diagnostics(cfg, r, problem) for r in results]
    failed = [r.index for r in results if r.error]
    report = {"name": cfg.name, "status": "failed" if failed else "ok", "failed_chains": failed,
              "kernel": cfg.sampler.kind, "chains": chains,
              "sim_calls": int(sum(c["sim_calls"] for c in chains)),
              "invalid_grads": int(sum(c["invalid_grads"] for c in chains))}
    tvds = [c["tvd"] for c in chains if "tvd" in c]
    if tvds:
        report["tvd"] = float(np.mean(tvds))
    acs = [c["increment_autocorr"] for c in chains if "increment_autocorr" in c]
    if acs:
        report["increment_autocorr"] = float(np.mean(acs))
    return report


@dataclass
class Bundle:
    path: Path
    report: dict

    @property
    def ok(self) -> bool:
        return self.report["status"] == "ok"


def resolve_output_dir(cfg: ExperimentConfig, override=None) -> Path:
    """Command-line override, then ``$HABC_OUT_DIR``, then the config, then ``runs/<name>``."""
    chosen = override or os.environ.get(OUT_DIR_ENV) or cfg.output_dir or os.path.join("runs", cfg.name)
    return Path(chosen)


def run_experiment(cfg: ExperimentConfig, out_dir=None) -> Bundle:
    """Run all chains of ``cfg`` and write the output bundle."""
    cfg = validate(cfg)
    path = resolve_output_dir(cfg, out_dir)
    path.mkdir(parents=True, exist_ok=True)
    problem = build_problem(cfg)
    (path / "config.resolved").write_text(cfg.to_yaml(), encoding="utf-8", newline="\n")
    results = []
    for i in range(cfg.chains):
        result = run_one_chain(cfg, i, problem)
        result.trace.write_csv(path / f"trace_{i}.csv")
        results.append(result)
        if result.error:
            break
    report = summarize(cfg, results, problem)
    if cfg.probe is not None and report["status"] == "ok":
        report["gradient_probe"] = gradient_probe(cfg, problem)
    write_json(report, path / "diagnostics.json")
    return Bundle(path, report)


# --------------------------------------------------------------------------
# Gradient probe and grid search
# --------------------------------------------------------------------------


def gradient_probe(cfg: ExperimentConfig, problem: Problem | None = None) -> dict:
    """Mean and spread of ``grad U`` over fresh seeds, per likelihood and seed count."""
    if cfg.probe is None:
        raise ConfigError("probe", "a probe section is required")
    if cfg.simulator.name == "logreg":
        raise ConfigError("simulator.name", "the gradient probe needs a simulator-based problem")
    problem = problem or build_problem(cfg)
    p = cfg.probe
    theta = problem.theta0 if p.theta is None else np.atleast_1d(np.asarray(p.theta, dtype=float))
    rows = []
    for k, (kind, n_seeds) in enumerate(itertools.product(p.likelihoods, p.n_seeds)):
        gcfg = GradientConfig(d_theta=cfg.sampler.d_theta, repeats=cfg.sampler.repeats,
                              method=cfg.sampler.method, likelihood=kind)
        stream = derive_stream(cfg.master_seed, 1000 + k)
        mean, sd, n_valid = gradient_variance_probe(problem.sim, theta, problem.y, problem.eps, gcfg,
                                                    p.trials, n_seeds, stream)
        rows.append({"likelihood": kind, "S": n_seeds, "mean": mean, "sd": sd, "valid": n_valid})
    reference = None
    if cfg.simulator.name == "exp_demo" and theta.size == 1:
        sim = problem.sim
        reference = exp_demo_sl_limit_gradient(float(theta[0]), float(problem.y[0]), float(problem.eps[0]),
                                               sim.n, sim.spec.prior)
    report = gradient_report(rows, reference)
    for row, raw in zip(report["rows"], rows):
        row["valid"] = raw["valid"]
    report["theta"] = theta
    return report


def grid_search(base: ExperimentConfig, grid: dict, score: str = "tvd") -> list[tuple[dict, float]]:
    """Evaluate every combination of sampler overrides; lowest score first.

    ``grid`` maps sampler field names to candidate values, e.g.
    ``{"eta": [0.005, 0.01], "friction_c": [1.0, 5.0]}``. Failed runs score
    ``inf``.
    """
    keys = sorted(grid)
    scored = []
    for values in itertools.product(*(grid[k] for k in keys)):
        overrides = dict(zip(keys, values))
        cfg = base.with_sampler(**overrides)
        problem = build_problem(cfg)
        report = summarize(cfg, [run_one_chain(cfg, i, problem) for i in range(cfg.chains)], problem)
        value = report.get(score, np.inf) if report["status"] == "ok" else np.inf
        scored.append((overrides, float(value)))
    return sorted(scored, key=lambda item: item[1])
