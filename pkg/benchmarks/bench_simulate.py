"""Timing of one-month model simulations.

Usage::

    python3 benchmarks/bench_simulate.py [--runs 100] [--hurst 0.9] [--method circulant]
"""

import argparse
import statistics
import time

from windstoch import model
from windstoch.model import ModelParams

BUDGET_S = 0.1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--runs", type=int, default=100)
    parser.add_argument("--hurst", type=float, default=0.9, choices=[0.5, 0.7, 0.9])
    parser.add_argument("--method", default="circulant", choices=["circulant", "durbin_levinson"])
    parser.add_argument("--steps", type=int, default=model.MONTH_STEPS)
    args = parser.parse_args(argv)

    params = ModelParams.table1(args.hurst, fgn_method=args.method)
    times = []
    for seed in range(args.runs):
        t0 = time.perf_counter()
        model.simulate(params.replace(seed=seed), args.steps)
        times.append(time.perf_counter() - t0)
    med = statistics.median(times)
    spread = statistics.stdev(times) if len(times) > 1 else 0.0
    verdict = "within" if med <= BUDGET_S else "over"
    print(f"H={args.hurst} method={args.method} steps={args.steps} runs={args.runs}: "
          f"median {1e3 * med:.2f} ms, std {1e3 * spread:.2f} ms ({verdict} the {1e3 * BUDGET_S:.0f} ms budget)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
