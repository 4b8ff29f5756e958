"""Run the numerical verification suites and print a one-line verdict each.

These are the same checks as ``cooplearn verify``; the script just shows how
to drive them from Python and inspect counterexamples.

Run:  python demos/verify_inequalities.py [--quick]
"""

import argparse
import time

from cooplearn import checks


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--quick", action="store_true", help="smaller case counts")
    args = ap.parse_args()

    overrides = {
        "eigenvalue-gap": dict(max_n=5),
        "one-step-decrease": dict(instances=10, draws=20_000),
        "equivalence": dict(cases=200),
        "norm-identity": dict(cases=200),
        "sieve-bound": dict(graphs=20),
    } if args.quick else {}

    failed = 0
    for name in checks.CHECKS:
        start = time.perf_counter()
        res = checks.run_check(name, **overrides.get(name, {}))
        print(f"{res.line()}  [{time.perf_counter() - start:.1f}s]")
        if not res.passed:
            failed += 1
            print(f"    first counterexample: {res.counterexample}")
    print(f"\n{len(checks.CHECKS) - failed}/{len(checks.CHECKS)} suites clean")


if __name__ == "__main__":
    main()
