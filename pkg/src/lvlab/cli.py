"""``lvlab <scenario> --config FILE [--seed N] [--out DIR] [--workers K]``."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .scenarios import SCENARIOS, ConfigError, defaults_help, parse_config, run_scenario


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="lvlab", description="Latent voter model experiments.",
        epilog=defaults_help(), formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("scenario", choices=SCENARIOS)
    p.add_argument("--config", required=True, help="key = value config file")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--out", default="out", help="output directory (default: out)")
    p.add_argument("--workers", type=int, default=1, help="worker processes (default: 1)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config)
    except (ConfigError, FileNotFoundError) as e:
        print(f"lvlab: invalid config: {e}", file=sys.stderr)
        return 2
    cfg = replace(cfg, scenario=args.scenario)
    if args.seed is not None:
        if args.seed < 0:
            print("lvlab: invalid config: seed: must be non-negative", file=sys.stderr)
            return 2
        cfg = replace(cfg, seed=args.seed)
    if args.workers < 1:
        print("lvlab: --workers must be at least 1", file=sys.stderr)
        return 2
    try:
        manifest = run_scenario(cfg, args.out, workers=args.workers)
    except (ConfigError, ValueError) as e:
        print(f"lvlab: {cfg.scenario} failed: {e}", file=sys.stderr)
        return 2
    for name, ok in manifest.flags.items():
        print(f"{'PASS' if ok else 'FAIL'} {name}")
    return 0 if manifest.all_pass else 1


if __name__ == "__main__":
    sys.exit(main())
