"""Command line entry point: ``costly-obs run | oracle | validate``."""
from __future__ import annotations

import argparse
import logging
import sys

from .environment import load_model, oracle_seq, oracle_sim
from .harness import ConfigError, ExperimentConfig, load_config, run_experiment


def _describe(config: ExperimentConfig) -> str:
    costs = ", ".join(format(c, "g") for c in config.sweep) if config.sweep else "model costs"
    return (f"D={config.model.D} A={config.model.A} T={config.T} m={config.m} beta={config.beta:g} "
            f"delta={config.delta:g} algorithms={','.join(config.algorithms)} seeds={len(config.seeds)} "
            f"costs=[{costs}]")


def cmd_run(args) -> int:
    config = load_config(args.config)
    results = run_experiment(config, args.out_dir, workers=args.workers)
    print(f"wrote {len(results)} runs to {args.out_dir}")
    return 0


def cmd_validate(args) -> int:
    config = load_config(args.config)
    print(f"ok: {_describe(config)}")
    return 0


def cmd_oracle(args) -> int:
    if args.model:
        model, m, beta, points = load_model(args.model), args.m, args.beta, [None]
        if m is None:
            raise ConfigError("--m is required with --model")
    else:
        config = load_config(args.config)
        model, points = config.model, config.cost_points()
        m = config.m if args.m is None else args.m
        beta = config.beta if args.beta is None else args.beta
    beta = 1.0 if beta is None else beta
    if not 0 <= m <= model.D:
        raise ConfigError(f"m must lie in [0, {model.D}]")
    print("cost,sim_value,sim_obs_set,seq_value")
    for cost in points:
        mdl = model if cost is None else model.with_costs(cost)
        sim, seq = oracle_sim(mdl, m, beta), oracle_seq(mdl, m, beta)
        label = "model" if cost is None else format(cost, "g")
        print(f"{label},{sim.value:.17g},{' '.join(map(str, sim.policy.obs_set))},{seq.value:.17g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="costly-obs", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an experiment and write CSV files")
    p.add_argument("config", help="TOML config path or preset:<name>")
    p.add_argument("out_dir")
    p.add_argument("--workers", type=int, default=None,
                   help="worker processes (default: COSTLY_OBS_WORKERS or available CPUs)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("validate", help="check a config without running it")
    p.add_argument("config")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("oracle", help="print oracle values for a model")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="config path or preset:<name>; every sweep point is reported")
    src.add_argument("--model", help="model JSON file")
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
