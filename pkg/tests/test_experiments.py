import json

import numpy as np
import pytest
import yaml

from habc.experiments import (DEMO_TUNED, PRESETS, ConfigError, ExperimentConfig, SamplerSection, SimulatorSection,
                              build_problem, demo_config, gradient_probe, grid_search, preset,
                              resolve_output_dir, run_experiment)
from habc.simulators.exp_demo import Y_OBS


def short(cfg, steps=50, chains=2):
    return cfg.replace(steps=steps, chains=chains)


class TestPresets:
    @pytest.mark.parametrize("name", sorted(PRESETS))
    def test_round_trip(self, name):
        cfg = preset(name)
        assert ExperimentConfig.from_yaml(cfg.to_yaml()) == cfg

    def test_demo_values(self):
        cfg = preset("demo-table1")
        assert cfg.epsilon == 0.37 and cfg.simulator.params["y"] == Y_OBS
        assert cfg.sampler.n_seeds == 5 and cfg.steps == 10_000 and cfg.chains == 5

    def test_blowfly_values(self):
        s = preset("blowfly").sampler
        assert (s.n_seeds, s.repeats, s.flip_per_seed, preset("blowfly").steps) == (10, 2, True, 5000)

    def test_logreg_values(self):
        cfg = preset("logreg")
        assert cfg.sampler.method == "spsa" and cfg.sampler.repeats == 10 and cfg.sampler.batch_size == 100

    def test_unknown(self):
        with pytest.raises(KeyError, match="demo-table1"):
            preset("nope")

    @pytest.mark.parametrize("kind", sorted(DEMO_TUNED))
    def test_demo_config(self, kind):
        cfg = demo_config(kind, persistent_seeds=False)
        assert cfg.sampler.kind == kind and not cfg.sampler.persistent_seeds


class TestValidation:
    @pytest.mark.parametrize("patch,path", [
        ({"steps": -1}, "steps"),
        ({"chains": 0}, "chains"),
        ({"likelihood": "exact"}, "likelihood"),
        ({"sampler": {"eta": 0.0}}, "sampler.eta"),
        ({"sampler": {"gamma": 1.5}}, "sampler.gamma"),
        ({"sampler": {"kind": "hmc"}}, "sampler.kind"),
        ({"sampler": {"method": "exact"}}, "sampler.method"),
        ({"sampler": {"n_seeds": 1}}, "sampler.n_seeds"),
        ({"sampler": {"bogus": 1}}, "sampler.bogus"),
        ({"simulator": {"name": "lotka"}}, "simulator.name"),
        ({"schema": 2}, "schema"),
        ({"extra": True}, "extra"),
    ])
    def test_error_names_field(self, patch, path):
        data = preset("demo-table1").to_dict()
        for key, value in patch.items():
            if isinstance(value, dict) and isinstance(data.get(key), dict):
                data[key].update(value)
            else:
                data[key] = value
        with pytest.raises(ConfigError) as info:
            ExperimentConfig.from_dict(data)
        assert info.value.path == path

    def test_unknown_simulator_param(self):
        cfg = preset("demo-table1")
        bad = cfg.replace(simulator=type(cfg.simulator)("exp_demo", {"y": 7.0, "colour": 1}))
        with pytest.raises(ConfigError) as info:
            build_problem(bad)
        assert info.value.path == "simulator.params.colour"

    def test_epsilon_length(self):
        with pytest.raises(ConfigError):
            build_problem(preset("blowfly").replace(epsilon=(1.0, 2.0)))

    def test_not_a_mapping(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_yaml("- 1\n- 2\n")


class TestRunning:
    def test_zero_steps_writes_bundle(self, tmp_path):
        bundle = run_experiment(preset("demo-table1").replace(steps=0, chains=2), tmp_path)
        assert bundle.ok
        assert sorted(p.name for p in tmp_path.iterdir()) == ["config.resolved", "diagnostics.json",
                                                             "trace_0.csv", "trace_1.csv"]
        assert (tmp_path / "trace_0.csv").read_text() == "step,theta_0\n"
        assert ExperimentConfig.load(tmp_path / "config.resolved") == preset("demo-table1").replace(steps=0, chains=2)

    def test_reruns_are_byte_identical(self, tmp_path):
        cfg = short(preset("demo-table1"))
        run_experiment(cfg, tmp_path / "a")
        run_experiment(cfg, tmp_path / "b")
        for name in ("trace_0.csv", "trace_1.csv", "diagnostics.json", "config.resolved"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_seed_changes_output(self, tmp_path):
        cfg = short(preset("demo-table1"), chains=1)
        run_experiment(cfg, tmp_path / "a")
        run_experiment(cfg.replace(master_seed=7), tmp_path / "b")
        assert (tmp_path / "a" / "trace_0.csv").read_bytes() != (tmp_path / "b" / "trace_0.csv").read_bytes()

    def test_diagnostics_content(self, tmp_path):
        bundle = run_experiment(short(preset("demo-table1"), steps=200), tmp_path)
        report = json.loads((tmp_path / "diagnostics.json").read_text())
        assert report["status"] == "ok" and len(report["chains"]) == 2
        chain = report["chains"][0]
        for key in ("tvd", "increment_autocorr", "sim_calls", "invalid_grads", "sim_calls_per_step"):
            assert key in chain
        assert bundle.report["tvd"] == pytest.approx(np.mean([c["tvd"] for c in report["chains"]]))

    def test_failed_chain_recorded(self, tmp_path):
        # a huge friction step destabilizes the thermostat
        cfg = short(preset("demo-table1"), steps=2000).with_sampler(eta=5.0, friction_c=0.0)
        bundle = run_experiment(cfg, tmp_path)
        assert not bundle.ok and bundle.report["failed_chains"] == [0]
        assert "error" in bundle.report["chains"][0]
        assert (tmp_path / "trace_0.csv").exists() and not (tmp_path / "trace_1.csv").exists()

    def test_output_dir_priority(self, monkeypatch, tmp_path):
        cfg = preset("demo-table1")
        monkeypatch.delenv("HABC_OUT_DIR", raising=False)
        assert str(resolve_output_dir(cfg)) == "runs/demo-table1"
        assert resolve_output_dir(cfg.replace(output_dir="cfgdir")).name == "cfgdir"
        monkeypatch.setenv("HABC_OUT_DIR", str(tmp_path / "env"))
        assert resolve_output_dir(cfg.replace(output_dir="cfgdir")) == tmp_path / "env"
        assert resolve_output_dir(cfg, tmp_path / "cli") == tmp_path / "cli"

    def test_logreg_and_toy_run(self, tmp_path):
        logreg = preset("logreg").replace(steps=20, thinning=1)
        assert run_experiment(logreg, tmp_path / "lr").ok
        toy = ExperimentConfig(name="toy", simulator=SimulatorSection("toy", {}), likelihood="kernel", steps=50,
                               chains=1, sampler=SamplerSection(kind="abc_mcmc", n_seeds=2, proposal_std=1.0))
        assert run_experiment(toy, tmp_path / "toy").ok

    def test_gradient_probe(self):
        cfg = preset("demo-gradfig")
        cfg = cfg.replace(probe=type(cfg.probe)(trials=200, n_seeds=(5,), likelihoods=("kernel", "synthetic")))
        report = gradient_probe(cfg)
        assert [r["likelihood"] for r in report["rows"]] == ["kernel", "synthetic"]
        assert -9.0 <= report["sl_limit_reference"] <= -6.5

    def test_grid_search_orders_by_score(self):
        base = short(preset("demo-table1"), steps=100, chains=1)
        scored = grid_search(base, {"eta": [0.005, 0.01]})
        assert len(scored) == 2 and scored[0][1] <= scored[1][1]


def test_yaml_is_plain():
    data = yaml.safe_load(preset("blowfly").to_yaml())
    assert isinstance(data["sampler"]["d_theta"], list) and data["schema"] == 1
