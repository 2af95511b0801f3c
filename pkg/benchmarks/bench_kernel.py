"""Compare the compiled and pure-Python event queues.

Two workloads per backend:

* ``noop``: schedule N no-op events at random times, then run them all.
* ``chain``: a self-rescheduling event, so the heap stays small and the
  cost is dominated by dispatch.

Optionally (``--sim``) also times a short linear-network simulation.
Usage: ``python benchmarks/bench_kernel.py [-n 1000000] [--sim]``
"""

from __future__ import annotations

import argparse
import random
import time

from qnetsim.kernel import HAVE_COMPILED, make_timeline


def _noop():
    pass


def bench_noop(impl, n, seed=1):
    tl = make_timeline(seed, impl)
    rng = random.Random(seed)
    times = [rng.randrange(10 ** 12) for _ in range(n)]
    t0 = time.perf_counter()
    sched = tl.schedule
    for t in times:
        sched(t, _noop)
    t1 = time.perf_counter()
    tl.run()
    t2 = time.perf_counter()
    assert tl.executed_count == n
    return {"schedule_per_s": n / (t1 - t0), "run_per_s": n / (t2 - t1),
            "total_per_s": n / (t2 - t0)}


def bench_chain(impl, n, seed=1):
    tl = make_timeline(seed, impl)
    left = [n]

    def tick():
        left[0] -= 1
        if left[0]:
            tl.schedule(tl.now + 1000, tick)

    tl.schedule(0, tick)
    t0 = time.perf_counter()
    tl.run()
    return {"total_per_s": n / (time.perf_counter() - t0)}


def bench_sim(impl, stop_s):
    from qnetsim.config import linear_config
    from qnetsim.network import Reservation
    from qnetsim.sim import build_simulation
    from qnetsim.units import seconds

    sim = build_simulation(linear_config(3, 10.0, stop_time_s=stop_s), kernel=impl)
    sim.routers["r1"].network.request(Reservation("r1", "r3", 0.9, 10, seconds(0.1),
                                                  seconds(stop_s)))
    s = sim.run()
    return {"events": s.executed, "wall_s": s.wall_seconds,
            "events_per_s": s.executed / s.wall_seconds}


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("-n", type=int, default=1_000_000)
    p.add_argument("--sim", action="store_true", help="also time a 2 s linear-network run")
    args = p.parse_args(argv)
    impls = ["python"] + (["cython"] if HAVE_COMPILED else [])
    results = {}
    for impl in impls:
        results[impl] = {"noop": bench_noop(impl, args.n), "chain": bench_chain(impl, args.n)}
        if args.sim:
            results[impl]["sim"] = bench_sim(impl, 2.0)
    for impl, r in results.items():
        print(f"{impl:>7} noop : schedule {r['noop']['schedule_per_s']:>12,.0f}/s  "
              f"run {r['noop']['run_per_s']:>12,.0f}/s  total {r['noop']['total_per_s']:>12,.0f}/s")
        print(f"{impl:>7} chain: {r['chain']['total_per_s']:>12,.0f} events/s")
        if "sim" in r:
            print(f"{impl:>7} sim  : {r['sim']['events']} events, "
                  f"{r['sim']['events_per_s']:,.0f} events/s")
    if len(results) == 2:
        for key in ("noop", "chain"):
            ratio = results["cython"][key]["total_per_s"] / results["python"][key]["total_per_s"]
            print(f"speedup {key}: {ratio:.1f}x")
    if not HAVE_COMPILED:
        print("compiled queue not available; only the fallback was timed")
    return results


if __name__ == "__main__":
    main()
