"""Does the guaranteed decay rate actually hold? Put it next to a simulation.

Three agents on a triangle, agent 0 measuring with unit noise. We average
the squared distance to the truth over many trials and compare it with the
closed-form bound, which only applies after a transient. The bound is
loose by three orders of magnitude but its t^-(1-eps) slope is the point.

Run:  python demos/bound_vs_simulation.py [--trials 100 --horizon 1000000]
"""

import argparse

import numpy as np

from cooplearn import analysis, bounds, graph, harness
from cooplearn.harness import ExperimentConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--horizon", type=int, default=1_000_000)
    ap.add_argument("--epsilon", type=float, default=0.9)
    args = ap.parse_args()

    init = [0.0, 5.0, 2.5]
    cfg = ExperimentConfig.from_dict(dict(
        graph=dict(family="complete", n=3),
        measurement=dict(nodes=[0]),
        noise=dict(sigma=1.0),
        stepsize=dict(epsilon=args.epsilon, offset=1.0),
        init=dict(kind="explicit", values=init),
        horizon=args.horizon,
        seed=1,
        trials=args.trials,
    ))
    agg = harness.monte_carlo(cfg)

    h = analysis.hitting_times(graph.generate("complete", 3)).max_value
    p = bounds.BoundParams(n=3, sigma=1.0, epsilon=args.epsilon, H=h, Z1=float(np.dot(init, init)))
    start = bounds.transient_connected(p)
    print(f"H = {h:g}; bound applies from t = {start:.6g}")
    print(f"{'t':>9} {'mean Z':>10} {'+-SE':>8} {'bound':>10}")
    for target in np.geomspace(10, args.horizon, 12):
        k = min(int(np.searchsorted(agg.t, target)), agg.t.size - 1)
        t = int(agg.t[k])
        b = f"{bounds.connected_bound(t, p, warn=False):.4g}" if t >= start else "-"
        print(f"{t:>9} {agg.Z_mean[k]:>10.4g} {agg.Z_se[k]:>8.2g} {b:>10}")


if __name__ == "__main__":
    main()
