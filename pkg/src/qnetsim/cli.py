"""Command line entry point: ``qnetsim --config net.json --out results/``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .config import ConfigError, load_config
from .kernel import SimulationError

log = logging.getLogger("qnetsim")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def build_parser():
    p = argparse.ArgumentParser(
        prog="qnetsim",
        description="Run a quantum repeater network simulation from a JSON config.")
    p.add_argument("--config", required=True, help="path to the JSON topology/parameter file")
    p.add_argument("--stop", type=float, default=None,
                   help="simulated seconds to run (overrides simulation.stop_time_s)")
    p.add_argument("--seed", type=int, default=None,
                   help="RNG seed (overrides simulation.seed)")
    p.add_argument("--out", default="results", help="directory for the CSV outputs")
    p.add_argument("--log-level", default="WARNING",
                   choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"])
    return p


def _positive(value, flag):
    if value is not None and not value > 0:
        raise ConfigError(f"{flag}: must be positive, got {value}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        _positive(args.stop, "--stop")
        if args.seed is not None and args.seed < 0:
            raise ConfigError(f"--seed: must be non-negative, got {args.seed}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    from .sim import build_simulation

    try:
        sim = build_simulation(cfg, seed=args.seed, stop_s=args.stop)
        run = sim.run()
        paths = sim.write_outputs(args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SimulationError, OSError, RuntimeError, ValueError) as exc:
        log.debug("run failed", exc_info=True)
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    summary = sim.summary()
    print(run)
    scalars = {k: v for k, v in summary.items() if not isinstance(v, dict)}
    print(json.dumps(scalars, indent=2, sort_keys=True))
    for name, path in sorted(paths.items()):
        print(f"wrote {name}: {path}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
