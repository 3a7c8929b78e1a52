import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from habc.core import Normal, PriorSpec, SimulatorSpec, derive_stream, draw_seed_vector, prior_grad_logpdf
from habc.gradients import (ABCGradient, GradientConfig, Method, MinibatchGradient, draw_mask, exact_grad_U,
                            fdsa_grad_U, fdsa_gradient, gaussian_target, gradient_variance_probe, spsa_grad_U,
                            spsa_gradient)
from habc.simulators import ExpDemoSimulator, LogisticRegressionTarget, Simulator
from habc.simulators.exp_demo import Y_OBS
from helpers import LinearGaussian


class Recording(Simulator):
    """Wraps a simulator and logs the seeds of every batch."""

    def __init__(self, inner):
        self.inner = inner
        self.spec = inner.spec
        self.calls = []

    def simulate(self, theta, seed):
        return self.inner.simulate(theta, seed)

    def simulate_batch(self, theta, seeds):
        self.calls.append((np.array(theta, copy=True), np.array(seeds, copy=True)))
        return self.inner.simulate_batch(theta, seeds)


class Constant(Simulator):
    def __init__(self, dim=1, value=None):
        self.spec = SimulatorSpec("const", dim, dim, PriorSpec(tuple(Normal() for _ in range(dim))))
        self.value = value

    def simulate(self, theta, seed):
        return np.asarray(theta, dtype=float) if self.value is None else np.full(self.spec.stat_dim, self.value)


def _all_masks(dim):
    return np.array(list(itertools.product([-1.0, 1.0], repeat=dim)))


class TestBlackBox:
    def test_central_differences_exact_on_quadratics(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            theta = rng.normal(size=4)
            g, valid = fdsa_gradient(lambda t: -float(t @ t), theta, rng.uniform(1e-3, 1.0))
            assert valid and np.allclose(g, -2 * theta, rtol=1e-9, atol=1e-9)

    def test_spsa_exact_on_linear_in_one_dimension(self):
        for a, delta in itertools.product((-3.0, 0.5, 7.25), (-1.0, 1.0)):
            g, _ = spsa_gradient(lambda t: a * t[0] + 2.0, [0.3], 1e-2, [[delta]])
            assert g[0] == pytest.approx(a, rel=1e-12, abs=1e-12)

    def test_spsa_mask_average_exact_on_linear(self):
        a = np.array([1.5, -2.0, 0.25])
        g, _ = spsa_gradient(lambda t: float(a @ t), np.zeros(3), 0.1, _all_masks(3))
        assert np.allclose(g, a, rtol=1e-12, atol=1e-12)

    def test_rademacher_symmetry(self):
        g, _ = spsa_gradient(lambda t: 4.0 * t[0], [0.0, 0.0], 0.1, _all_masks(2))
        assert g[0] == pytest.approx(4.0, rel=1e-12) and g[1] == pytest.approx(0.0, abs=1e-12)

    def test_masks(self):
        m = np.array([draw_mask(5, derive_stream(1)) for _ in range(1)])
        assert set(np.unique(m)) <= {-1.0, 1.0}
        big = draw_mask(100_000, derive_stream(2))
        assert abs(big.mean()) < 0.02


class TestSimulatorGradients:
    @pytest.mark.parametrize("dim", [1, 2, 3, 4])
    def test_mask_enumeration_equals_fdsa(self, dim):
        rng = np.random.default_rng(dim)
        sim = LinearGaussian(rng.normal(size=(3, dim)))
        theta = rng.normal(size=dim)
        seeds = draw_seed_vector(6, derive_stream(dim))
        y, eps = rng.normal(size=3), np.full(3, 0.7)
        cfg = GradientConfig(d_theta=0.05, method="spsa")
        masks = _all_masks(dim)
        spsa = spsa_grad_U(sim, theta, seeds, y, eps, None, cfg, None, masks=masks)
        fdsa = fdsa_grad_U(sim, theta, seeds, y, eps, None, GradientConfig(d_theta=0.05, method="fdsa"))
        assert np.allclose(spsa.grad, fdsa.grad, rtol=1e-10, atol=1e-10)

    def test_budgets(self):
        sim = LinearGaussian(np.ones((2, 3)))
        seeds = draw_seed_vector(4, derive_stream(0))
        f = fdsa_grad_U(sim, np.zeros(3), seeds, np.zeros(2), np.ones(2), None, GradientConfig(method="fdsa"))
        s = spsa_grad_U(sim, np.zeros(3), seeds, np.zeros(2), np.ones(2), None,
                        GradientConfig(method="spsa", repeats=5), derive_stream(1))
        assert f.sims_used == 2 * 4 * 3 and s.sims_used == 2 * 4 * 5

    def test_common_random_numbers(self):
        sim = Recording(LinearGaussian(np.ones((1, 2))))
        seeds = draw_seed_vector(3, derive_stream(0))
        spsa_grad_U(sim, np.zeros(2), seeds, [0.0], [1.0], None, GradientConfig(repeats=3), derive_stream(1))
        fdsa_grad_U(sim, np.zeros(2), seeds, [0.0], [1.0], None, GradientConfig(method="fdsa"))
        assert len(sim.calls) == 2 * 3 + 2 * 2
        for _, used in sim.calls:
            assert np.array_equal(used, seeds)
        # the two sides of each difference are mirror images around theta
        for (a, _), (b, _) in zip(sim.calls[::2], sim.calls[1::2]):
            assert np.allclose(a, -b)

    def test_stationary_point_leaves_prior_gradient(self):
        sim = Constant()
        theta = np.array([0.8])
        seeds = draw_seed_vector(2, derive_stream(0))
        est = fdsa_grad_U(sim, theta, seeds, theta, [0.3], None, GradientConfig(method="fdsa"))
        assert est.grad[0] == pytest.approx(-prior_grad_logpdf(sim.spec.prior, theta)[0], abs=1e-12)

    def test_invalid_estimate_flagged(self):
        sim = Constant(value=np.nan)
        seeds = draw_seed_vector(2, derive_stream(0))
        est = spsa_grad_U(sim, [0.1], seeds, [0.0], [1.0], None, GradientConfig(), derive_stream(1))
        assert not est.valid and np.all(np.isnan(est.grad))

    def test_out_of_domain_side_is_invalid(self):
        sim = ExpDemoSimulator()
        seeds = draw_seed_vector(5, derive_stream(0))
        est = fdsa_grad_U(sim, [0.005], seeds, [Y_OBS], [0.37], None, GradientConfig(d_theta=0.01, method="fdsa"))
        assert not est.valid

    def test_probe_zero_variance(self):
        mean, sd, n = gradient_variance_probe(Constant(), [0.5], [0.5], [1.0], GradientConfig(), 20, 3,
                                              derive_stream(0))
        assert n == 20 and sd[0] == 0.0

    def test_probe_needs_two_trials(self):
        with pytest.raises(ValueError):
            gradient_variance_probe(Constant(), [0.5], [0.5], [1.0], GradientConfig(), 1, 3, derive_stream(0))

    def test_demo_variance_ordering(self):
        sim = ExpDemoSimulator()
        theta = [sim.theta_map()]
        sds = {}
        for kind in ("kernel", "synthetic"):
            cfg = GradientConfig(d_theta=1e-2, method="fdsa", likelihood=kind)
            _, sd, _ = gradient_variance_probe(sim, theta, [Y_OBS], [0.37], cfg, 1000, 50, derive_stream(4))
            sds[kind] = sd[0]
        assert sds["kernel"] > sds["synthetic"]

    def test_oracle_dispatch(self):
        sim = LinearGaussian(np.eye(2))
        seeds = draw_seed_vector(3, derive_stream(0))
        oracle = ABCGradient(sim, np.zeros(2), 1.0, GradientConfig(method="fdsa"), 3)
        est = oracle(np.array([0.2, -0.1]), seeds)
        assert est.method == "fdsa" and est.sims_used == 12
        assert np.allclose(oracle.prior_only([1.0, 2.0]), [0.25, 0.5])


class TestExact:
    def test_logistic_matches_finite_differences(self):
        target = LogisticRegressionTarget.bundled()
        rng = np.random.default_rng(2)
        theta = rng.normal(0, 0.2, target.dim)
        batch = rng.choice(target.n_data, 50, replace=False)
        g = exact_grad_U(target, theta, batch).grad
        U = lambda t: -target.loglik_and_grad(t, batch)[0]
        for d in rng.choice(target.dim, 10, replace=False):
            e = np.zeros(target.dim)
            e[d] = 1e-5
            assert g[d] == pytest.approx((U(theta + e) - U(theta - e)) / 2e-5, rel=1e-5, abs=1e-6)

    def test_full_batch_is_exact_posterior_gradient(self):
        target = LogisticRegressionTarget.bundled()
        theta = np.random.default_rng(3).normal(0, 0.1, target.dim)
        assert np.allclose(exact_grad_U(target, theta).grad, -target.loglik_and_grad(theta)[1])

    def test_minibatch_spsa_uses_one_batch(self):
        target = LogisticRegressionTarget.bundled()
        oracle = MinibatchGradient(target, 100, derive_stream(0), method="spsa", repeats=10)
        est = oracle(np.zeros(target.dim))
        assert est.valid and est.grad.shape == (128,) and est.method == "spsa"

    def test_gaussian_target(self):
        t = gaussian_target(3)
        assert np.array_equal(t(np.array([1.0, -2.0, 0.5])).grad, [1.0, -2.0, 0.5])
        assert t.log_prior([1.0]) == 0.0


def test_config_validation():
    with pytest.raises(ValueError):
        GradientConfig(d_theta=0.0)
    with pytest.raises(ValueError):
        GradientConfig(repeats=0)
    cfg = GradientConfig(d_theta=[0.1, 0.2], method="fdsa")
    assert cfg.method is Method.FDSA and np.array_equal(cfg.widths(2), [0.1, 0.2])


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=1, max_size=5), st.floats(1e-3, 0.5))
def test_fdsa_exact_on_any_quadratic(center, d):
    c = np.array(center)
    theta = np.linspace(-1, 1, len(c))
    g, _ = fdsa_gradient(lambda t: -0.5 * float((t - c) @ (t - c)), theta, d)
    assert np.allclose(g, c - theta, rtol=1e-8, atol=1e-8)
