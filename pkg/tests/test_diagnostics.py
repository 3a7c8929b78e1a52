import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from habc.core import Gamma, PriorSpec, ShapeError
from habc.diagnostics import (ChainTrace, ProjectionMatrix, batch_means_se, equal_probability_edges,
                              exp_demo_sl_limit_gradient, format_gradient_report, gradient_report, histogram_csv,
                              increment_autocorr, mean_tvd, project_2d, read_trace_csv, tvd_vs_analytic,
                              write_json)

UNIFORM = stats.uniform(0, 1)


class TestTVD:
    def test_perfect_histogram_is_zero(self):
        edges = np.linspace(0, 1, 11)
        samples = (np.arange(1000) + 0.5) / 1000
        assert tvd_vs_analytic(samples, UNIFORM, edges) == pytest.approx(0.0, abs=1e-12)

    def test_all_mass_in_one_bin(self):
        edges = np.linspace(0, 1, 11)
        assert tvd_vs_analytic(np.full(50, 0.05), UNIFORM, edges) == pytest.approx(0.9, abs=1e-12)

    def test_samples_outside_edges(self):
        edges = np.linspace(0, 1, 5)
        assert tvd_vs_analytic(np.full(10, 3.0), UNIFORM, edges) == pytest.approx(1.0, abs=1e-12)

    def test_half_mass_moved(self):
        edges = np.array([0.0, 0.5, 1.0])
        samples = np.r_[np.full(75, 0.25), np.full(25, 0.75)]
        assert tvd_vs_analytic(samples, UNIFORM, edges) == pytest.approx(0.25, abs=1e-12)

    def test_exact_draws_approach_zero(self):
        post = stats.gamma(20.1, scale=1 / 154.9)
        edges = equal_probability_edges(post, 100)
        draws = post.rvs(size=200_000, random_state=np.random.default_rng(0))
        assert tvd_vs_analytic(draws, post, edges) < 0.02

    def test_edges_have_equal_mass(self):
        post = stats.gamma(3.0)
        edges = equal_probability_edges(post, 20)
        assert edges[0] == 0.0 and edges[-1] == np.inf
        assert np.allclose(np.diff(post.cdf(edges)), 0.05)

    def test_rejects_bad_traces(self):
        with pytest.raises(ValueError):
            tvd_vs_analytic(np.empty(0), UNIFORM, [0.0, 1.0])
        with pytest.raises(ShapeError):
            tvd_vs_analytic(np.zeros((5, 2)), UNIFORM, [0.0, 1.0])

    def test_mean_tvd_discards_burn_in(self):
        edges = np.array([0.0, 0.5, 1.0])
        trace = ChainTrace(np.r_[np.full(10, 0.25), np.full(45, 0.25), np.full(45, 0.75)], np.arange(100))
        mean, values = mean_tvd([trace, trace], UNIFORM, edges, burn_in=0.1)
        assert mean == pytest.approx(0.0, abs=1e-12) and len(values) == 2


class TestAutocorrelation:
    def test_white_noise_near_zero(self):
        walk = np.cumsum(np.random.default_rng(0).normal(size=50_000))
        assert abs(increment_autocorr(walk)) < 0.02

    def test_alternating_increments(self):
        x = np.cumsum(np.tile([1.0, -1.0], 50))
        assert increment_autocorr(x) == pytest.approx(-1.0, abs=0.02)

    def test_constant_increments(self):
        assert increment_autocorr(np.arange(20.0)) == 1.0

    def test_ar1_increments(self):
        rng = np.random.default_rng(1)
        d = np.zeros(100_000)
        for t in range(1, d.size):
            d[t] = 0.8 * d[t - 1] + rng.normal()
        assert increment_autocorr(np.cumsum(d)) == pytest.approx(0.8, abs=0.01)

    def test_averages_coordinates(self):
        x = np.column_stack([np.cumsum(np.tile([1.0, -1.0], 50)), np.arange(100.0) ** 1.0])
        r = increment_autocorr(x)
        assert r == pytest.approx(-1.0, abs=0.02)  # the constant-increment column carries no information

    def test_too_short(self):
        with pytest.raises(ValueError):
            increment_autocorr([1.0, 2.0])

    def test_batch_means_on_iid(self):
        v = np.random.default_rng(2).normal(size=100_000)
        assert batch_means_se(v) == pytest.approx(1 / np.sqrt(v.size), rel=0.3)


class TestProjection:
    def test_linear(self):
        p = ProjectionMatrix.from_seed(4, 3)
        a, b = np.random.default_rng(0).normal(size=(2, 10, 4))
        assert np.allclose(project_2d(a + 2 * b, p), project_2d(a, p) + 2 * project_2d(b, p))

    def test_subsamples_evenly(self):
        x = np.arange(100.0)[:, None] * np.ones((1, 3))
        p = ProjectionMatrix(np.array([[1.0, 0, 0], [0, 0, 1.0]]))
        out = project_2d(x, p, n_points=5)
        assert out[:, 0].tolist() == [0.0, 25.0, 50.0, 74.0, 99.0]

    def test_seeded(self):
        assert np.array_equal(ProjectionMatrix.from_seed(5, 1).rows, ProjectionMatrix.from_seed(5, 1).rows)
        with pytest.raises(ShapeError):
            project_2d(np.zeros((3, 4)), ProjectionMatrix.from_seed(5, 1))


class TestReports:
    def test_sl_limit_reference_on_demo(self):
        prior = PriorSpec((Gamma(0.1, 0.1),))
        value = exp_demo_sl_limit_gradient(19.1 / 154.9, 7.74, 0.37, 20, prior)
        assert -9.0 <= value <= -6.5

    def test_sl_limit_matches_closed_form(self):
        # mean 1/t, variance 1/(n t^2) for the Gamma(n, rate n t) replicate law
        prior = PriorSpec((Gamma(0.1, 0.1),))
        t, y, eps, n = 0.12, 7.74, 0.37, 20

        def L(t):
            v = 1 / (n * t * t) + eps * eps
            return -0.5 * np.log(2 * np.pi * v) - (y - 1 / t) ** 2 / (2 * v)

        h = 1e-6
        closed = -((L(t + h) - L(t - h)) / (2 * h) + (0.1 - 1) / t - 0.1)
        assert exp_demo_sl_limit_gradient(t, y, eps, n, prior) == pytest.approx(closed, rel=1e-5)

    def test_gradient_report(self):
        report = gradient_report([{"likelihood": "kernel", "S": 5, "mean": np.array([1.5]), "sd": [2.0]}], -7.5)
        assert report["rows"][0] == {"likelihood": "kernel", "S": 5, "mean": 1.5, "sd": 2.0}
        text = format_gradient_report(report)
        assert "kernel" in text and "-7.50" in text

    def test_json_handles_numpy(self, tmp_path):
        write_json({"a": np.arange(3), "b": np.float64(1.5), "c": np.int64(2)}, tmp_path / "r.json")
        assert json.loads((tmp_path / "r.json").read_text()) == {"a": [0, 1, 2], "b": 1.5, "c": 2}

    def test_histogram_csv(self, tmp_path):
        histogram_csv(np.full(4, 0.25), UNIFORM, [0.0, 0.5, 1.0], tmp_path / "h.csv")
        lines = (tmp_path / "h.csv").read_text().splitlines()
        assert lines[0] == "lo,hi,empirical,exact" and lines[1] == "0.0,0.5,1.0,0.5"


class TestTraceFiles:
    def test_round_trip(self, tmp_path):
        trace = ChainTrace(np.array([[0.1, 1 / 3], [np.pi, -2e-300]]), np.array([1, 2]))
        trace.write_csv(tmp_path / "t.csv")
        back = read_trace_csv(tmp_path / "t.csv")
        assert np.array_equal(back.samples, trace.samples) and back.steps.tolist() == [1, 2]
        assert (tmp_path / "t.csv").read_text().splitlines()[0] == "step,theta_0,theta_1"

    def test_discard(self):
        trace = ChainTrace(np.arange(10.0), np.arange(10))
        assert len(trace.discard(0.25)) == 8 and len(trace.discard(0.0)) == 10


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=1, max_size=200))
def test_tvd_bounded(xs):
    value = tvd_vs_analytic(np.array(xs), stats.norm(), equal_probability_edges(stats.norm(), 10))
    assert 0.0 <= value <= 1.0
