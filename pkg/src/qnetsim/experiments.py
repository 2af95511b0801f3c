"""Desk-scale versions of the three metropolitan-network experiments.

Each function runs the required configurations back to back and returns a
plain dict of the measured summaries, so the acceptance suite and the
command line share one code path::

    python -m qnetsim.experiments uc1 [--stop 50] [--seed 0]
    python -m qnetsim.experiments uc2 [--stop 20]
    python -m qnetsim.experiments uc3 [--stop 100] [--seeds 5]
"""

from __future__ import annotations

import argparse
import json
import logging

from .config import chicago_config
from .sim import build_simulation

log = logging.getLogger(__name__)

UC1_EFFICIENCIES = (0.01, 0.10, 0.50, 0.75)
UC1_COOPERATIVITIES = (50.0, 500.0)


def run_point(memory_policy="even", *, classical="rtt", frequency_hz=20e3, efficiency=0.75,
              cooperativity=500.0, stop_s=100.0, seed=0):
    """One Chicago run; returns the scalar summary plus StarLight's busy fraction."""
    cfg = chicago_config(memory_policy, efficiency=efficiency, cooperativity=cooperativity,
                         frequency_hz=frequency_hz, classical=classical, stop_time_s=stop_s,
                         seed=seed)
    sim = build_simulation(cfg)
    run = sim.run()
    summary = sim.summary()
    out = {k: v for k, v in summary.items() if not isinstance(v, dict)}
    out["starlight_busy_fraction"] = summary["busy_fraction"]["StarLight"]
    out["events"] = run.executed
    out["wall_seconds"] = run.wall_seconds
    tl = sim.timeline
    out["conserved"] = tl.scheduled_count == tl.executed_count + tl.cancelled_count + \
        tl.pending_count
    log.info("%s %s f=%g e=%g C=%g seed=%d: %s", memory_policy, classical, frequency_hz,
             efficiency, cooperativity, seed, run)
    return out


def use_case_1(stop_s=50.0, seed=0, frequency_hz=2e3):
    """Throughput against memory efficiency (C=500) and cooperativity (e=0.75)."""
    by_e = {e: run_point(efficiency=e, cooperativity=500.0, frequency_hz=frequency_hz,
                         stop_s=stop_s, seed=seed) for e in UC1_EFFICIENCIES}
    by_c = {500.0: by_e[0.75]}
    by_c[50.0] = run_point(efficiency=0.75, cooperativity=50.0, frequency_hz=frequency_hz,
                           stop_s=stop_s, seed=seed)
    return {"by_efficiency": by_e, "by_cooperativity": by_c}


def use_case_2(stop_s=20.0, seed=0):
    """Classical latency against memory frequency."""
    return {
        "ms_2k": run_point(classical="rtt", frequency_hz=2e3, stop_s=stop_s, seed=seed),
        "ms_20k": run_point(classical="rtt", frequency_hz=20e3, stop_s=stop_s, seed=seed),
        "us_20k": run_point(classical="propagation", frequency_hz=20e3, stop_s=stop_s,
                            seed=seed),
    }


def use_case_3(stop_s=100.0, seeds=5):
    """Even against weighted memory distribution over several seeds."""
    out = {}
    for policy in ("even", "weighted"):
        out[policy] = [run_point(policy, stop_s=stop_s, seed=s) for s in range(seeds)]
    return out


def main(argv=None):
    p = argparse.ArgumentParser(prog="python -m qnetsim.experiments",
                                description="Run a desk-scale use-case experiment.")
    p.add_argument("case", choices=["uc1", "uc2", "uc3"])
    p.add_argument("--stop", type=float, default=None, help="simulated seconds per run")
    p.add_argument("--seed", type=int, default=0, help="seed for uc1/uc2")
    p.add_argument("--seeds", type=int, default=5, help="number of seeds for uc3")
    p.add_argument("--log-level", default="INFO")
    args = p.parse_args(argv)
    logging.basicConfig(level=args.log_level, format="%(levelname)s %(name)s: %(message)s")
    if args.case == "uc1":
        res = use_case_1(args.stop or 50.0, args.seed)
    elif args.case == "uc2":
        res = use_case_2(args.stop or 20.0, args.seed)
    else:
        res = use_case_3(args.stop or 100.0, args.seeds)
    print(json.dumps(res, indent=2, sort_keys=True, default=str))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
