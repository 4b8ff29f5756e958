"""Verification suites: inequality grids, exhaustive eigenvalue checks and fuzzing.

Every check returns a :class:`CheckResult` carrying the number of cases
examined and the first counterexample found, if any.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import analysis, bounds, graph, protocol

__all__ = ["CheckResult", "CHECKS", "ALIASES", "run_check", "connected_graphs"]

Q_GRID = (0.1, 0.5, 1.0)
EPS_GRID = (0.25, 0.5, 0.9)
HORIZON = 10**6
# both sides of a decay comparison can sink into subnormals
_UNDERFLOW = 1e-300


@dataclass
class CheckResult:
    name: str
    cases: int = 0
    violations: int = 0
    counterexample: dict | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def record(self, ok: bool, **case) -> None:
        self.cases += 1
        if not ok:
            self.violations += 1
            if self.counterexample is None:
                self.counterexample = case

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = f"{status} {self.name}: {self.cases} cases, {self.violations} violations"
        if self.counterexample is not None:
            text += f"; first counterexample {self.counterexample}"
        return text


def _leq(lhs: float, rhs: float, rel: float = 1e-12) -> bool:
    return lhs <= rhs + rel * max(abs(rhs), abs(lhs), 1e-300)


# --------------------------------------------------------------------------
# decay machinery


def check_phi_bound() -> CheckResult:
    """Product of contraction factors against its exponential envelope."""
    res = CheckResult("phi-bound")
    pairs = [(2, 10), (2, 100), (50, 200), (2, 10**4), (100, 10**5), (2, HORIZON), (10**5, HORIZON)]
    for q, eps, (a, b) in itertools.product(Q_GRID, EPS_GRID, pairs):
        lhs = bounds.phi(q, a, b, eps)
        rhs = math.exp(-q * (b**eps - a**eps) / eps)
        res.record(_leq(lhs, rhs), q=q, eps=eps, a=a, b=b, phi=lhs, bound=rhs)
    return res


def check_log_threshold() -> CheckResult:
    """``beta ln t <= t`` at ``t = ceil(3 beta ln beta)`` and beyond."""
    res = CheckResult("log-threshold")
    for beta in (3.0, 5.0, 10.0, 100.0, 1e3, 1e4, 1e6):
        t0 = math.ceil(3 * beta * math.log(beta))
        for t in (t0, t0 + 1, 2 * t0, 10 * t0):
            res.record(beta * math.log(t) <= t, beta=beta, t=t)
    return res


def check_power_concavity(seed: int = 0, samples: int = 2000) -> CheckResult:
    """``(b - x)^eps <= b^eps - eps x / b^(1-eps)`` for ``x <= b``."""
    res = CheckResult("power-concavity")
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        eps = float(rng.uniform(0.01, 0.99))
        b = float(10 ** rng.uniform(-2, 6))
        x = float(b * rng.uniform(0.0, 1.0))
        lhs = (b - x) ** eps
        rhs = b**eps - eps / b ** (1 - eps) * x
        res.record(_leq(lhs, rhs, 1e-10), eps=eps, b=b, x=x)
    return res


def check_phi_small() -> CheckResult:
    """``Phi_q(a, b) <= 1/b^2`` whenever ``2 <= a <= b - (2/q) b^(1-eps) ln b``."""
    res = CheckResult("phi-small")
    for q, eps in itertools.product(Q_GRID, EPS_GRID):
        for b in np.unique(np.logspace(1, 6, 16).astype(np.int64)):
            b = int(b)
            a_max = math.floor(b - 2.0 / q * b ** (1 - eps) * math.log(b))
            if a_max < 2:
                continue
            for a in sorted({2, max(2, a_max // 2), a_max}):
                lhs = bounds.phi(q, a, b, eps)
                res.record(_leq(lhs, 1.0 / b**2), q=q, eps=eps, a=a, b=b, phi=lhs)
    return res


def check_half_gap() -> CheckResult:
    """``b >= alpha(q, eps)`` implies ``b - (2/q) b^(1-eps) ln b >= b/2``."""
    res = CheckResult("half-gap")
    for q, eps in itertools.product(Q_GRID, EPS_GRID):
        a = bounds.alpha(q, eps)
        for mult in (1.0, 1.01, 1.5, 2.0, 10.0, 1e3):
            b = a * mult
            if not math.isfinite(b):
                continue
            lhs = b - 2.0 / q * b ** (1 - eps) * math.log(b)
            res.record(lhs >= b / 2 * (1 - 1e-12), q=q, eps=eps, b=b)
    return res


def check_unit_gap_decay(horizon: int = HORIZON) -> CheckResult:
    """Recursion with ``t_k = k`` stays under its closed form for ``k >= alpha``."""
    res = CheckResult("unit-gap-decay")
    times = np.arange(1, horizon + 1)
    for q, eps in itertools.product(Q_GRID, EPS_GRID):
        k0 = bounds.alpha(q, eps)
        if k0 > horizon:
            res.notes.append(f"q={q}, eps={eps}: threshold {k0:.3g} beyond horizon, vacuous")
            continue
        for a1, d in ((0.0, 1.0), (100.0, 1.0), (1.0, 10.0), (1e4, 0.0)):
            seq = bounds.decay_recursion(a1, q, d, eps, times)
            ks = np.arange(max(1, math.ceil(k0)), horizon + 1)
            rhs = bounds.decay_bound_unit_gaps(ks, a1, q, d, eps)
            lhs = seq[ks - 1]
            bad = np.flatnonzero(lhs > rhs * (1 + 1e-12) + _UNDERFLOW)
            res.record(bad.size == 0, q=q, eps=eps, a1=a1, d=d,
                       k=int(ks[bad[0]]) if bad.size else None)
    return res


def check_gapped_decay(horizon: int = HORIZON, seed: int = 0) -> CheckResult:
    """Recursion along gapped times ``t_k`` against its closed form."""
    res = CheckResult("gapped-decay")
    rng = np.random.default_rng(seed)
    for q, eps, T in itertools.product(Q_GRID, EPS_GRID, (1, 2, 4)):
        k0 = bounds.decay_threshold(q, eps, T, "proof")
        n_idx = horizon // T
        if k0 > n_idx:
            res.notes.append(f"q={q}, eps={eps}, T={T}: threshold {k0:.3g} beyond horizon, vacuous")
            continue
        gap_sets = {
            "max": np.full(n_idx - 1, T),
            "random": rng.integers(1, T + 1, size=n_idx - 1),
        }
        for label, gaps in gap_sets.items():
            times = np.concatenate([[1], 1 + np.cumsum(gaps)])
            for a1, d in ((0.0, 1.0), (100.0, 1.0), (1e4, 0.0)):
                seq = bounds.decay_recursion(a1, q, d, eps, times, T=T)
                ks = np.arange(max(1, math.ceil(k0)), n_idx + 1)
                rhs = bounds.decay_bound(ks, a1, q, d, eps, T)
                lhs = seq[ks - 1]
                bad = np.flatnonzero(lhs > rhs * (1 + 1e-12) + _UNDERFLOW)
                res.record(bad.size == 0, q=q, eps=eps, T=T, gaps=label, a1=a1, d=d,
                           k=int(ks[bad[0]]) if bad.size else None)
    return res


# --------------------------------------------------------------------------
# graph checks


def connected_graphs(n: int):
    """Every connected labelled graph on ``n`` nodes."""
    pairs = list(itertools.combinations(range(n), 2))
    for mask in range(1 << len(pairs)):
        edges = [p for b, p in enumerate(pairs) if mask >> b & 1]
        if len(edges) >= n - 1 and graph.is_connected(n, edges):
            yield graph.build_graph(n, edges)


def check_eigenvalue_gap(max_n: int = 6) -> CheckResult:
    """``lambda_max(A) <= 1 - 1/(24 H)`` for every connected graph and measuring set."""
    res = CheckResult("eigenvalue-gap")
    worst = -math.inf
    for n in range(2, max_n + 1):
        subsets = np.array(
            [[(m >> i) & 1 for i in range(n)] for m in range(1, 1 << n)], dtype=float
        )
        for g in connected_graphs(n):
            h = analysis.hitting_times(g).max_value
            a0 = graph.protocol_matrix(g).values
            batch = a0[None, :, :] - 0.25 * subsets[:, :, None] * np.eye(n)[None, :, :]
            lam = np.linalg.eigvalsh(batch)[:, -1]
            limit = 1.0 - 1.0 / (24.0 * h)
            k = int(np.argmax(lam))
            worst = max(worst, float(lam[k] - limit))
            for idx in range(len(lam)):
                ok = lam[idx] <= limit + 1e-12
                if ok:
                    res.cases += 1
                else:
                    s = [i for i in range(n) if subsets[idx, i]]
                    res.record(False, n=n, edges=g.edges, measuring=s, lam=float(lam[idx]), limit=limit)
    res.notes.append(f"largest lambda_max - limit: {worst:.4g}")
    return res


def _random_graph(rng: np.random.Generator, n: int, p: float) -> graph.GraphSnapshot:
    edges = [e for e in itertools.combinations(range(n), 2) if rng.random() < p]
    return graph.build_graph(n, edges)


def random_connected_graph(rng: np.random.Generator, n: int) -> graph.GraphSnapshot:
    while True:
        g = _random_graph(rng, n, float(rng.uniform(0.2, 0.9)))
        if g.is_connected():
            return g


def check_equivalence(cases: int = 1000, seed: int = 0) -> CheckResult:
    """Per-agent step and matrix-form step agree on identical noise draws."""
    res = CheckResult("equivalence")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for case in range(cases):
        n = int(rng.integers(1, 11))
        l = int(rng.integers(1, 4))
        g = _random_graph(rng, n, float(rng.uniform(0, 1)))
        measuring = [i for i in range(n) if rng.random() < 0.3]
        dist = protocol.DISTRIBUTIONS[case % 3]
        noise = protocol.NoiseModel(
            sigma=float(rng.uniform(0, 2)), sigma_prime=float(rng.uniform(0, 2)),
            distribution=dist, symmetric_offset_noise=bool(rng.random() < 0.3),
        )
        sched = protocol.StepsizeSchedule(float(rng.uniform(0.05, 0.95)), float(rng.uniform(0, 5)))
        t = int(rng.integers(1, 1000))
        state = protocol.ProtocolState(rng.normal(0, 5, (n, l)), t)
        mu = rng.normal(0, 3, l)
        draws = noise.draw(rng, g, measuring, l)
        a = protocol.step(state, g, measuring, sched, noise, mu, draws=draws, strict=False).v
        b = protocol.step_matrix_form(state, g, measuring, sched, draws, mu, strict=False).v
        err = float((np.abs(a - b) / np.maximum(1.0, np.abs(b))).max())
        worst = max(worst, err)
        res.record(err <= 1e-12, case=case, n=n, l=l, distribution=dist, err=err)
    res.notes.append(f"largest relative difference {worst:.3g}")
    return res


def check_norm_identity(cases: int = 1000, seed: int = 0) -> CheckResult:
    """Norm-decrease identity for random symmetric matrices."""
    res = CheckResult("norm-identity")
    rng = np.random.default_rng(seed)
    for case in range(cases):
        n = int(rng.integers(1, 9))
        m = rng.normal(size=(n, n))
        a = (m + m.T) / 2
        if case % 2:
            a = np.abs(a) / max(1.0, float(np.abs(a).sum(axis=1).max()))
        x = rng.normal(size=n) * 10 ** rng.uniform(-3, 3)
        lhs, rhs = analysis.norm_decrease_identity(a, x)
        res.record(abs(lhs - rhs) <= 1e-10 * float(x @ x), case=case, lhs=lhs, rhs=rhs)
    return res


def check_sieve_bound(graphs: int = 100, seed: int = 0, min_n: int = 3, max_n: int = 8) -> CheckResult:
    """Sieve constant of the Metropolis matrix against ``eta/(n D)``, both sum conventions."""
    res = CheckResult("sieve-bound")
    rng = np.random.default_rng(seed)
    disagreements = 0
    for case in range(graphs):
        g = random_connected_graph(rng, int(rng.integers(min_n, max_n + 1)))
        a = graph.metropolis_matrix(g)
        lb = analysis.sieve_lower_bound(a)
        ok = {}
        for ordered in (True, False):
            k = analysis.sieve_constant(a, ordered=ordered).value
            ok[ordered] = k >= lb * (1 - 1e-12)
            res.record(ok[ordered], case=case, n=g.n, edges=g.edges, ordered=ordered, kappa=k, bound=lb)
        disagreements += ok[True] != ok[False]
    res.notes.append(f"conventions disagree on {disagreements} of {graphs} graphs")
    k2 = graph.metropolis_matrix(graph.generate("complete", 2))
    k_ord = analysis.sieve_constant(k2, ordered=True).value
    k_un = analysis.sieve_constant(k2, ordered=False).value
    res.notes.append(
        f"K2 is a known exception: kappa={k_ord:.4f} (ordered), {k_un:.4f} (unordered) "
        f"vs eta/(nD)=0.5; both exceed eta/(n(D+1))=0.25"
    )
    return res


def check_one_step_decrease(instances: int = 50, draws: int = 100_000, seed: int = 0, max_n: int = 8) -> CheckResult:
    """Monte Carlo mean of ``Z(t+1)`` against the edge-sum and sieve-constant decrease bounds.

    Each instance fixes a random connected graph, state and nonempty measuring
    set; a bound passes when the sample mean is within three standard errors.
    The sieve constant is taken on the Metropolis weights under both sum
    conventions.
    """
    from .harness import one_step_samples

    res = CheckResult("one-step-decrease")
    rng = np.random.default_rng(seed)
    slack = {"edge-sum": [], "ordered": [], "unordered": []}
    for case in range(instances):
        n = int(rng.integers(2, max_n + 1))
        g = random_connected_graph(rng, n)
        s = [i for i in range(n) if rng.random() < 0.4] or [int(rng.integers(n))]
        noise = protocol.NoiseModel(
            sigma=float(rng.uniform(0, 2)), sigma_prime=float(rng.uniform(0, 2)),
            distribution=protocol.DISTRIBUTIONS[case % 3],
        )
        sched = protocol.StepsizeSchedule(float(rng.uniform(0.05, 0.95)), 1.0)
        state = protocol.ProtocolState(rng.normal(0, 3, n), int(rng.integers(1, 200)))
        mu = float(rng.normal())
        delta = sched(state.t)
        z = protocol.variance(state, mu)
        samples = one_step_samples(state, g, s, sched, noise, mu, draws, rng)
        mean = float(samples.mean())
        se = float(samples.std(ddof=1) / math.sqrt(draws))
        noise_term = delta**2 / 16 * (len(s) * noise.sigma**2 + n * noise.sigma_prime**2)
        v = state.v[:, 0]
        ii, jj = np.array(g.edges, dtype=int).reshape(-1, 2).T
        edge_sum = float(((v[ii] - v[jj]) ** 2 / np.maximum(g.degrees[ii], g.degrees[jj])).sum())
        rhs = {"edge-sum": z - delta / 8 * edge_sum - delta / 4 * float(((v[s] - mu) ** 2).sum()) + noise_term}
        met = graph.metropolis_matrix(g)
        for ordered, label in ((True, "ordered"), (False, "unordered")):
            kappa = analysis.sieve_constant(met, ordered=ordered).value
            rhs[label] = (1 - delta / 8 * kappa) * z + noise_term
        for label, bound in rhs.items():
            slack[label].append((bound - mean) / max(se, 1e-300))
            res.record(mean <= bound + 3 * se, case=case, bound=label, n=n, mean=mean, rhs=bound, se=se)
    for label, values in slack.items():
        res.notes.append(f"{label}: smallest margin {min(values):.3g} standard errors")
    return res


CHECKS: dict[str, Callable[..., CheckResult]] = {
    "phi-bound": check_phi_bound,
    "log-threshold": check_log_threshold,
    "power-concavity": check_power_concavity,
    "phi-small": check_phi_small,
    "half-gap": check_half_gap,
    "unit-gap-decay": check_unit_gap_decay,
    "gapped-decay": check_gapped_decay,
    "eigenvalue-gap": check_eigenvalue_gap,
    "equivalence": check_equivalence,
    "norm-identity": check_norm_identity,
    "sieve-bound": check_sieve_bound,
    "one-step-decrease": check_one_step_decrease,
}

ALIASES = {
    "lemma24": "phi-bound",
    "lemma25": "log-threshold",
    "lemma26": "power-concavity",
    "lemma27": "phi-small",
    "lemma28": "half-gap",
    "lemma29": "unit-gap-decay",
    "cor210": "gapped-decay",
    "lemma212": "eigenvalue-gap",
    "lemma23": "sieve-bound",
    "lemma211": "one-step-decrease",
    "cor22": "norm-identity",
}


def run_check(name: str, **kwargs) -> CheckResult:
    key = ALIASES.get(name, name)
    if key not in CHECKS:
        raise KeyError(f"unknown check {name!r}; available: {sorted(CHECKS) + sorted(ALIASES)}")
    return CHECKS[key](**kwargs)
