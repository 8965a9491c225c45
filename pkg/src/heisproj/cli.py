"""Command-line entry point: ``heisproj <subcommand> [options]``."""
from __future__ import annotations

import argparse
import json
import sys

from .emit import emit
from .experiments import THREADS_ENV, ExperimentConfig, run, selftest_configs

SUBCOMMANDS = ("sweep", "kernel", "transversality", "grushin", "slicing", "bounds", "selftest")


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="heisproj", description="Vertical projection experiments in H^n.")
    p.add_argument("command", choices=SUBCOMMANDS)
    p.add_argument("--config", help="experiment config JSON (see README for the schema)")
    p.add_argument("--out", help="output directory (default: config 'out', else ./results)")
    p.add_argument("--seed", type=int, help="override the config seed (unsigned 64-bit)")
    p.add_argument("--threads", type=int,
                   help=f"worker processes; defaults to ${THREADS_ENV} or 1")
    return p


def _load(command: str, path: str | None, seed: int | None) -> ExperimentConfig:
    if path:
        with open(path, encoding="utf-8") as fh:
            d = json.load(fh)
        d.setdefault("experiment", command)
        if d["experiment"] != command:
            raise SystemExit(f"config is for {d['experiment']!r}, not {command!r}")
    else:
        d = {"experiment": command}
    if seed is not None:
        d["seed"] = seed
    return ExperimentConfig.from_dict(d)


def main(argv=None) -> int:
    parser = _parser()
    args = parser.parse_args(argv)
    if args.command == "selftest":
        seed = 0 if args.seed is None else args.seed
        # small instances: check outcomes are printed, the exit code only reflects crashes
        for name, cfg in selftest_configs(seed):
            report = run(cfg, args.threads)
            emit(report, args.out or "results", name)
            print(f"{name}: {'pass' if report['passed'] else 'FAIL'}")
        return 0
    try:
        cfg = _load(args.command, args.config, args.seed)
    except (OSError, ValueError, TypeError) as exc:
        parser.error(f"bad config: {exc}")
    report = run(cfg, args.threads)
    paths = emit(report, args.out or cfg.out or "results", cfg.experiment)
    for c in report["checks"]:
        print(f"{c['name']}: {'pass' if c['passed'] else 'FAIL'}")
    print("wrote " + ", ".join(paths))
    return 0 if report["passed"] else 1


if __name__ == "__main__":
    sys.exit(main())
