"""Command-line entry point: ``habc run|preset|gradprobe``."""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from habc.diagnostics import format_gradient_report, write_json
from habc.experiments import (PRESETS, ConfigError, ExperimentConfig, gradient_probe, preset,
                              resolve_output_dir, run_experiment)


def _overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    changes = {}
    if args.chains is not None:
        changes["chains"] = args.chains
    if args.steps is not None:
        changes["steps"] = args.steps
    if args.seed is not None:
        changes["master_seed"] = args.seed
    return cfg.replace(**changes) if changes else cfg


def _load(path: str) -> ExperimentConfig:
    if path in PRESETS and not Path(path).exists():
        return preset(path)
    return ExperimentConfig.load(path)


def cmd_run(args) -> int:
    cfg = _overrides(_load(args.config), args)
    bundle = run_experiment(cfg, args.out_dir)
    report = bundle.report
    line = f"{report['status']}: {cfg.chains} chain(s) of {cfg.steps} steps -> {bundle.path}"
    if "tvd" in report:
        line += f"  tvd={report['tvd']:.4f}"
    print(line)
    return 0 if bundle.ok else 1


def cmd_preset(args) -> int:
    text = preset(args.name).to_yaml()
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)
    return 0


def cmd_gradprobe(args) -> int:
    cfg = _overrides(_load(args.config), args)
    if args.trials is not None and cfg.probe is not None:
        cfg = cfg.replace(probe=replace(cfg.probe, trials=args.trials))
    report = gradient_probe(cfg)
    out = resolve_output_dir(cfg, args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.resolved").write_text(cfg.to_yaml(), encoding="utf-8", newline="\n")
    write_json(report, out / "gradprobe.json")
    print(format_gradient_report(report))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="habc", description="Hamiltonian ABC experiment runner.")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--chains", type=int, help="number of chains")
        p.add_argument("--steps", type=int, help="steps per chain")
        p.add_argument("--seed", type=int, help="master seed")
        p.add_argument("--out-dir", help="output directory (overrides $HABC_OUT_DIR and the config)")

    p = sub.add_parser("run", help="run the chains described by a config file or preset name")
    p.add_argument("config", help="YAML config path, or a preset name")
    common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("preset", help="print or save a preset config")
    p.add_argument("name", choices=sorted(PRESETS))
    p.add_argument("--out", help="write the YAML here instead of stdout")
    p.set_defaults(func=cmd_preset)

    p = sub.add_parser("gradprobe", help="gradient bias/variance study for a config")
    p.add_argument("config", help="YAML config path with a probe section, or a preset name")
    p.add_argument("--trials", type=int, help="probe trials per row")
    common(p)
    p.set_defaults(func=cmd_gradprobe)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=[logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)],
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, KeyError, FileNotFoundError) as exc:
        print(f"error: {exc.args[0] if isinstance(exc, KeyError) else exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
