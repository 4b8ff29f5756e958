"""Forty agents, three networks, one question: how long until everyone agrees?

Agents start at random points in [0, 5] and one of them gets noisy
measurements of the truth (mu = 0) each step. We time how long the group
takes to get within 0.5 of the truth in mean square, for a line, a star and
a complete graph. The line is dramatically slower; star and complete are
close, even though a complete graph has far more edges than a star.

Run:  python demos/topology_race.py [--trials 20]
"""

import argparse
import time
import warnings

from cooplearn import harness
from cooplearn.harness import ExperimentConfig
from cooplearn.protocol import StepsizeWarning


def race(family, n, trials, seed):
    cfg = ExperimentConfig.from_dict(dict(
        graph=dict(family=family, n=n),
        noise=dict(sigma=1.0),
        stepsize=dict(epsilon=0.75, offset=0.0),
        init=dict(kind="box", low=0.0, high=5.0),
        horizon=3_000_000,
        seed=seed,
        trials=trials,
        threshold=0.5,
        early_exit=True,
    ))
    # offset 0 makes the first stepsize exactly 1; that is intended here
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", StepsizeWarning)
        return harness.monte_carlo(cfg)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=40)
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    medians = {}
    for family in ("complete", "star", "line"):
        start = time.perf_counter()
        agg = race(family, args.n, args.trials, args.seed)
        medians[family] = agg.median_convergence_time()
        print(f"{family:>8}: median steps to Z <= 0.5 = {medians[family]:>10.1f}"
              f"   ({time.perf_counter() - start:.1f}s)")

    print()
    print(f"line / complete = {medians['line'] / medians['complete']:.1f}")
    print(f"line / star     = {medians['line'] / medians['star']:.1f}")
    print("A line has to pass information along n hops, so its walk takes ~n^2 steps to mix.")


if __name__ == "__main__":
    main()
