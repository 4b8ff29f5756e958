"""What makes a graph fast or slow for cooperative learning.

For a few small graphs we print the quantities the convergence guarantees
depend on: the worst-case hitting time H of the lazy Metropolis walk, the
sieve constant kappa of the Metropolis matrix and its lower bound, and the
largest eigenvalue of the protocol matrix when one agent measures.

Then we watch H grow like n^2 on lines and stay ~linear on complete graphs.

Run:  python demos/graph_anatomy.py
"""

from cooplearn import analysis, graph


def describe(name, g, measuring=(0,)):
    h = analysis.hitting_times(g).max_value
    m = graph.metropolis_matrix(g)
    kappa = analysis.sieve_constant(m).value
    lower = analysis.sieve_lower_bound(m)
    lam = analysis.lambda_max(graph.protocol_matrix(g, measuring))
    print(f"{name:<12} n={g.n:<3} D={analysis.diameter(g):<3} H={h:>9.2f}  "
          f"kappa={kappa:.4f} (bound {lower:.4f})  lambda_max={lam:.6f}")


def main():
    print("Small graphs, agent 0 measuring:")
    for family, n in [("complete", 2), ("line", 3), ("complete", 3), ("star", 6), ("ring", 6), ("lollipop", 8)]:
        describe(f"{family}({n})", graph.generate(family, n))

    # the two-node graph is the one case where kappa dips below eta/(nD)
    print("\nNote: complete(2) has kappa < 1/2 = eta/(n D); the weaker eta/(n (D+1)) still holds.")

    print("\nHitting time scaling:")
    print(f"{'n':>4} {'H(line)/n^2':>12} {'H(complete)/n':>14}")
    for n in (8, 16, 32, 64):
        hl = analysis.hitting_times(graph.generate("line", n)).max_value
        hk = analysis.hitting_times(graph.generate("complete", n)).max_value
        print(f"{n:>4} {hl / n**2:>12.3f} {hk / n:>14.3f}")


if __name__ == "__main__":
    main()
