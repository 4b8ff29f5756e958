"""Command-line front end: ``simulate``, ``sweep``, ``analyze``, ``bound`` and ``verify``.

Experiment flags mirror :class:`cooplearn.harness.ExperimentConfig` keys.
A ``--config`` YAML file supplies a base; flags given on the command line
override it, and anything left unset falls back to the defaults.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import math
import sys
import warnings
from pathlib import Path
from typing import Any, Sequence

import yaml

from . import analysis, bounds, checks, graph, harness
from .protocol import DISTRIBUTIONS, StepsizeWarning

# flag dest -> (section, key); section None means a top-level config key
_CONFIG_FLAGS: dict[str, tuple[str | None, str]] = {
    "graph": ("graph", "family"),
    "n": ("graph", "n"),
    "rows": ("graph", "rows"),
    "cols": ("graph", "cols"),
    "B": ("graph", "B"),
    "edge_budget": ("graph", "edge_budget"),
    "graph_seed": ("graph", "seed"),
    "graph_file": ("graph", "path"),
    "measuring": ("measurement", "nodes"),
    "period": ("measurement", "period"),
    "rotate": ("measurement", "rotate"),
    "sigma": ("noise", "sigma"),
    "sigma_prime": ("noise", "sigma_prime"),
    "distribution": ("noise", "distribution"),
    "symmetric_offset_noise": ("noise", "symmetric_offset_noise"),
    "epsilon": ("stepsize", "epsilon"),
    "offset": ("stepsize", "offset"),
    "init": ("init", "kind"),
    "target": (None, "target"),
    "dim": (None, "dim"),
    "horizon": (None, "horizon"),
    "seed": (None, "seed"),
    "trials": (None, "trials"),
    "stride": (None, "stride"),
    "threshold": (None, "threshold"),
    "early_exit": (None, "early_exit"),
}

_FAMILIES = graph.FAMILIES + ("random", "file")


class CliError(Exception):
    """Configuration or input problem reported with exit status 2."""


class _UsageError(CliError):
    """Missing required input; reported through argparse's usage error."""


def _load_yaml(path: str) -> dict[str, Any]:
    try:
        data = yaml.safe_load(Path(path).read_text())
    except OSError as exc:
        raise CliError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise CliError(f"cannot parse config {path}: {exc}") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise CliError(f"config {path} must be a mapping")
    return data


def _digest(payload: dict[str, Any]) -> str:
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


# --------------------------------------------------------------------------
# parser


def _add_graph_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("graph")
    g.add_argument("--graph", choices=_FAMILIES, help="topology family")
    g.add_argument("--n", type=int, help="number of agents")
    g.add_argument("--rows", type=int, help="grid2d rows")
    g.add_argument("--cols", type=int, help="grid2d columns")
    g.add_argument("--graph-file", help="edge-list file (family 'file')")


def _add_experiment_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="YAML experiment config")
    _add_graph_flags(p)
    g = p.add_argument_group("topology sequence")
    g.add_argument("--B", type=int, help="connectivity window of a random sequence")
    g.add_argument("--edge-budget", type=int, help="edges per window of a random sequence")
    g.add_argument("--graph-seed", type=int, help="seed of the random sequence")
    m = p.add_argument_group("measurements")
    m.add_argument("--measuring", type=int, nargs="+", help="measuring agents")
    m.add_argument("--period", type=int, help="steps between measurements")
    m.add_argument("--rotate", action="store_true", default=None, help="one measuring agent per measurement time, in turn")
    z = p.add_argument_group("noise and stepsize")
    z.add_argument("--sigma", type=float, help="measurement noise scale")
    z.add_argument("--sigma-prime", type=float, help="offset noise scale")
    z.add_argument("--distribution", choices=DISTRIBUTIONS)
    z.add_argument("--symmetric-offset-noise", action="store_true", default=None)
    z.add_argument("--epsilon", type=float, help="stepsize exponent: 1/(t+offset)^(1-epsilon)")
    z.add_argument("--offset", type=float, help="stepsize offset")
    r = p.add_argument_group("run")
    r.add_argument("--init", choices=("box", "zeros", "target"), help="initial estimates")
    r.add_argument("--init-box", type=float, nargs=2, metavar=("LOW", "HIGH"), help="uniform initial box (implies --init box)")
    r.add_argument("--target", type=float, nargs="+", help="true value mu (default zeros)")
    r.add_argument("--dim", type=int, help="dimension of mu when --target is not given")
    r.add_argument("--horizon", type=int, help="number of steps")
    r.add_argument("--seed", type=int, help="master seed")
    r.add_argument("--trials", type=int, help="Monte Carlo trials")
    r.add_argument("--stride", type=int, help="trajectory sampling stride")
    r.add_argument("--threshold", type=float, help="sup-norm error defining convergence")
    r.add_argument("--early-exit", action="store_true", default=None, help="stop once every trial has converged")
    o = p.add_argument_group("output")
    o.add_argument("--out", help="directory for artifacts")
    o.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cooplearn", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one experiment or a Monte Carlo batch")
    _add_experiment_flags(p)

    p = sub.add_parser("sweep", help="convergence time as a function of the number of agents")
    _add_experiment_flags(p)
    p.add_argument("--n-list", required=True, help="comma-separated agent counts, e.g. 8,16,24")

    p = sub.add_parser("analyze", help="sieve constant, hitting time, largest eigenvalue and diameter")
    _add_graph_flags(p)
    p.add_argument("--measuring", type=int, nargs="+", help="measuring agents for the largest eigenvalue")
    p.add_argument("--format", choices=("table", "json"), default="table")

    p = sub.add_parser("bound", help="transient thresholds and expected-variance bounds")
    p.add_argument("--config", help="YAML file with bound parameters")
    p.add_argument("--kind", choices=("connected", "general"), help="bound family (default connected)")
    _add_graph_flags(p)
    for name, typ in (("l", int), ("T", int), ("B", int), ("M", int), ("sigma", float),
                      ("sigma-prime", float), ("epsilon", float), ("H", float), ("d-max", int), ("Z1", float)):
        p.add_argument(f"--{name}", type=typ)
    p.add_argument("--t", type=float, nargs="+", help="times at which to evaluate the bound")
    p.add_argument("--format", choices=("table", "json"), default="table")

    p = sub.add_parser("verify", help="run verification suites")
    p.add_argument("--check", action="append", help="check name or alias (repeatable); default all")
    p.add_argument("--max-n", type=int, help="largest graph size for the exhaustive eigenvalue check")
    p.add_argument("--list", action="store_true", help="list available checks")
    return parser


# --------------------------------------------------------------------------
# config resolution


def resolve_config(args: argparse.Namespace) -> harness.ExperimentConfig:
    """Merge defaults, the optional config file and explicit flags."""
    data = _load_yaml(args.config) if getattr(args, "config", None) else {}
    for key in data:
        if not isinstance(data[key], dict) and key in harness._SECTIONS:
            raise CliError(f"config section {key!r} must be a mapping")
    for dest, (section, key) in _CONFIG_FLAGS.items():
        value = getattr(args, dest, None)
        if value is None:
            continue
        if isinstance(value, list):
            value = list(value)
        if section is None:
            data[key] = value
        else:
            data.setdefault(section, {})
            data[section] = dict(data[section] or {}, **{key: value})
    if getattr(args, "init_box", None) is not None:
        low, high = args.init_box
        data["init"] = dict(data.get("init") or {}, kind="box", low=low, high=high)
    fam = (data.get("graph") or {}).get("family", harness.GraphSpec.family)
    if fam not in ("grid2d", "file") and (data.get("graph") or {}).get("n") is None:
        raise _UsageError("--n is required (or graph.n in --config)")
    try:
        return harness.ExperimentConfig.from_dict(data)
    except (TypeError, ValueError) as exc:
        raise CliError(str(exc)) from exc


def _snapshot_from_args(args: argparse.Namespace) -> graph.GraphSnapshot:
    family = args.graph or "complete"
    if family == "random":
        raise CliError("analysis needs a single graph, not a random sequence")
    if family not in ("grid2d", "file") and args.n is None:
        raise _UsageError("--n is required")
    spec = harness.GraphSpec(family=family, n=args.n, rows=args.rows, cols=args.cols, path=args.graph_file)
    try:
        return spec.snapshot()
    except (OSError, ValueError) as exc:
        raise CliError(str(exc)) from exc


def _write(result, args: argparse.Namespace, stem: str) -> Path | None:
    if not args.out:
        return None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{stem}-{result.config_digest}.{args.format}"
    harness.export(result, args.format, path)
    return path


# --------------------------------------------------------------------------
# subcommands


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    print(f"config_digest {cfg.digest()}")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", StepsizeWarning)
        if cfg.trials > 1:
            result = harness.monte_carlo(cfg)
        else:
            result = harness.run(cfg)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    if isinstance(result, harness.TrialAggregate):
        print(f"trials {result.trials}")
        print(f"final_t {int(result.t[-1])}")
        print(f"final_Z_mean {result.Z_mean[-1]:.6g} (se {result.Z_se[-1]:.3g})")
        if cfg.threshold is not None:
            med = result.median_convergence_time()
            reached = sum(c is not None for c in result.convergence_times)
            text = "not reached" if math.isinf(med) else f"{med:g}"
            print(f"median_convergence_time {text} ({reached}/{result.trials} trials converged)")
    else:
        print(f"final_t {result.final_t}")
        print(f"final_Z {result.Z[-1]:.6g}")
        if cfg.threshold is not None:
            ct = result.convergence_time
            print(f"convergence_time {'not reached' if ct is None else ct}")
    path = _write(result, args, "simulate")
    if path is not None:
        print(f"wrote {path}")
    return 0


def _parse_n_list(text: str) -> list[int]:
    try:
        values = [int(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError as exc:
        raise CliError(f"cannot parse --n-list {text!r}: {exc}") from exc
    if not values:
        raise CliError("--n-list is empty")
    if any(v < 1 for v in values):
        raise CliError("--n-list entries must be positive")
    return values


def cmd_sweep(args: argparse.Namespace) -> int:
    ns = _parse_n_list(args.n_list)
    if args.n is None:
        args.n = ns[0]
    base = resolve_config(args)
    if base.threshold is None:
        base = dataclasses.replace(base, threshold=0.5)
    base = dataclasses.replace(base, early_exit=True)
    print(f"config_digest {base.digest()}")
    rows = []
    for n in ns:
        cfg = base.replace(graph={"n": n})
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", StepsizeWarning)
            agg = harness.monte_carlo(cfg)
        rows.append((n, agg.median_convergence_time()))
    lines = ["n,convergence_time"] + [f"{n},{'inf' if math.isinf(c) else format(c, 'g')}" for n, c in rows]
    text = "\n".join(lines) + "\n"
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        path = out / f"sweep-{base.digest()}.csv"
        path.write_text(f"# config_digest={base.digest()}\n" + text)
        print(f"wrote {path}")
    sys.stdout.write(text)
    return 0


def cmd_analyze(args: argparse.Namespace) -> int:
    g = _snapshot_from_args(args)
    if not g.is_connected():
        raise CliError("graph is disconnected")
    family = args.graph or "complete"
    measuring = args.measuring
    if measuring is None:
        measuring = [graph.default_sampler(family, g.n) if family in graph.FAMILIES else 0]
    if any(not 0 <= i < g.n for i in measuring):
        raise CliError(f"measuring agents {measuring} out of range")
    met = graph.metropolis_matrix(g)
    report = {
        "n": g.n,
        "edges": g.num_edges,
        "kappa": analysis.sieve_constant(met, ordered=True).value,
        "kappa_unordered": analysis.sieve_constant(met, ordered=False).value,
        "kappa_lower_bound": analysis.sieve_lower_bound(met),
        "H": analysis.hitting_times(g).max_value,
        "lambda_max": analysis.lambda_max(graph.protocol_matrix(g, measuring)),
        "measuring": list(measuring),
        "D": analysis.diameter(g),
    }
    digest = _digest({"graph": family, "n": g.n, "edges": g.edges, "measuring": list(measuring)})
    if args.format == "json":
        print(json.dumps({"config_digest": digest, **report}, indent=1))
    else:
        print(f"config_digest {digest}")
        width = max(map(len, report))
        for key, value in report.items():
            text = f"{value:.10g}" if isinstance(value, float) else str(value)
            print(f"{key:<{width}}  {text}")
    return 0


_BOUND_FIELDS = {f.name for f in dataclasses.fields(bounds.BoundParams)}


def cmd_bound(args: argparse.Namespace) -> int:
    data = _load_yaml(args.config) if args.config else {}
    times = data.pop("t", None)
    kind = data.pop("kind", "connected")
    unknown = set(data) - _BOUND_FIELDS
    if unknown:
        raise CliError(f"unknown bound keys: {sorted(unknown)}")
    for name in _BOUND_FIELDS:
        value = getattr(args, name, None)
        if value is not None:
            data[name] = value
    kind = args.kind or kind
    if args.t is not None:
        times = args.t
    if args.graph is not None or args.graph_file is not None:
        g = _snapshot_from_args(args)
        data.setdefault("n", g.n)
        if kind == "connected" and "H" not in data:
            data["H"] = analysis.hitting_times(g).max_value
        if "d_max" not in data:
            data["d_max"] = int(g.degrees.max())
    if "n" not in data:
        raise _UsageError("--n is required (or a --graph)")
    try:
        p = bounds.BoundParams(**data)
        if kind == "connected":
            transient = bounds.transient_connected(p)
            log_transient = bounds.log_transient_connected(p)
            fn = bounds.connected_bound
        else:
            transient = bounds.transient_general(p)
            log_transient = bounds.log_transient_general(p)
            fn = bounds.general_bound
        values = [(float(t), fn(float(t), p, warn=False)) for t in (times or [])]
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    digest = _digest({"kind": kind, **dataclasses.asdict(p)})
    rows = [{"t": t, "bound": b, "past_transient": t >= transient} for t, b in values]
    if args.format == "json":
        print(json.dumps({"config_digest": digest, "kind": kind, "params": dataclasses.asdict(p),
                          "transient": transient, "log_transient": log_transient, "values": rows}, indent=1))
    else:
        print(f"config_digest {digest}")
        print(f"kind {kind}")
        print(f"transient {transient:.10g} (log {log_transient:.6g})")
        if rows:
            print(f"{'t':>14}  {'bound':>16}  past_transient")
            for r in rows:
                print(f"{r['t']:>14.6g}  {r['bound']:>16.10g}  {r['past_transient']}")
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    if args.list:
        for name in checks.CHECKS:
            aliases = sorted(a for a, target in checks.ALIASES.items() if target == name)
            print(name + (f" ({', '.join(aliases)})" if aliases else ""))
        return 0
    names = args.check or list(checks.CHECKS)
    for name in names:
        if checks.ALIASES.get(name, name) not in checks.CHECKS:
            raise CliError(f"unknown check {name!r}; use --list")
    print(f"config_digest {_digest({'checks': names, 'max_n': args.max_n})}")
    ok = True
    for name in names:
        kwargs = {}
        if checks.ALIASES.get(name, name) == "eigenvalue-gap" and args.max_n is not None:
            kwargs["max_n"] = args.max_n
        res = checks.run_check(name, **kwargs)
        print(res.line())
        for note in res.notes:
            print(f"  {note}")
        ok &= res.passed
    return 0 if ok else 1


_COMMANDS = {
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "analyze": cmd_analyze,
    "bound": cmd_bound,
    "verify": cmd_verify,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        parser.error(str(exc))
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, FloatingPointError, graph.GraphError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
