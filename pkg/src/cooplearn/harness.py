"""Experiment configuration, batched simulation, Monte Carlo aggregation and export.

Randomness: trial ``k`` of a run with master seed ``s`` uses the generator
``default_rng(SeedSequence(s, spawn_key=(k,)))``. From that stream the
initial state is drawn first (when the init is random), then the per-step
noise in the order documented in :mod:`cooplearn.protocol`. A trial
therefore reproduces exactly whether it runs alone or in a batch, and
iterating :func:`cooplearn.protocol.step` with the same generator gives the
same trajectory up to rounding.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .graph import (
    GraphSequence,
    GraphSnapshot,
    default_sampler,
    generate,
    random_sequence,
    read_graph,
)
from .protocol import (
    MeasurementSchedule,
    NoiseModel,
    ProtocolState,
    StepsizeSchedule,
    StepsizeWarning,
    as_target,
)

__all__ = [
    "GraphSpec",
    "MeasurementSpec",
    "NoiseSpec",
    "StepsizeSpec",
    "InitSpec",
    "ExperimentConfig",
    "RunResult",
    "TrialAggregate",
    "trial_rng",
    "run",
    "run_trials",
    "monte_carlo",
    "convergence_time",
    "one_step_samples",
    "expected_next_variance",
    "export",
    "read_csv",
    "CSV_RUN_HEADER",
    "CSV_AGGREGATE_HEADER",
]


CSV_RUN_HEADER = ("t", "Z", "max_err")
CSV_AGGREGATE_HEADER = ("t", "Z_mean", "Z_se", "err_mean", "err_se", "trials")

_CHUNK_STEPS = 2048
_DRAW_BUDGET = 1 << 21


# --------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class GraphSpec:
    """``family`` is a named topology, ``"random"`` for a random B-connected
    sequence, or ``"file"`` to read a graph file."""

    family: str = "complete"
    n: int | None = None
    rows: int | None = None
    cols: int | None = None
    B: int = 1
    edge_budget: int | None = None
    seed: int = 0
    path: str | None = None

    def sequence(self) -> GraphSequence:
        if self.family == "random":
            if self.n is None:
                raise ValueError("graph.n is required for a random sequence")
            return random_sequence(self.n, self.B, self.edge_budget, self.seed)
        return GraphSequence.static(self.snapshot())

    def snapshot(self) -> GraphSnapshot:
        if self.family == "file":
            if not self.path:
                raise ValueError("graph.path is required for family 'file'")
            return read_graph(self.path)
        if self.family == "grid2d":
            if self.rows is None or self.cols is None:
                raise ValueError("graph.rows and graph.cols are required for grid2d")
            return generate("grid2d", (self.rows, self.cols))
        if self.family == "random":
            raise ValueError("a random sequence has no single snapshot")
        if self.n is None:
            raise ValueError("graph.n is required")
        return generate(self.family, self.n)

    def node_count(self) -> int:
        if self.family == "grid2d" and self.rows and self.cols:
            return self.rows * self.cols
        if self.family == "file":
            return self.snapshot().n
        if self.n is None:
            raise ValueError("graph.n is required")
        return self.n


@dataclass(frozen=True)
class MeasurementSpec:
    """Measuring agents; ``nodes=None`` picks the family's canonical sampler."""

    nodes: tuple[int, ...] | None = None
    period: int = 1
    rotate: bool = False


@dataclass(frozen=True)
class NoiseSpec:
    sigma: float = 1.0
    sigma_prime: float = 0.0
    distribution: str = "gaussian"
    symmetric_offset_noise: bool = False


@dataclass(frozen=True)
class StepsizeSpec:
    epsilon: float = 0.75
    offset: float = 1.0


@dataclass(frozen=True)
class InitSpec:
    """``kind`` is ``box`` (uniform on ``[low, high]`` per entry), ``zeros``,
    ``target`` (start at the target) or ``explicit`` (``values``)."""

    kind: str = "box"
    low: float = 0.0
    high: float = 5.0
    values: tuple | None = None


_SECTIONS = {
    "graph": GraphSpec,
    "measurement": MeasurementSpec,
    "noise": NoiseSpec,
    "stepsize": StepsizeSpec,
    "init": InitSpec,
}


@dataclass(frozen=True)
class ExperimentConfig:
    graph: GraphSpec = field(default_factory=GraphSpec)
    measurement: MeasurementSpec = field(default_factory=MeasurementSpec)
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    stepsize: StepsizeSpec = field(default_factory=StepsizeSpec)
    init: InitSpec = field(default_factory=InitSpec)
    target: tuple[float, ...] | str = "zeros"
    dim: int = 1
    horizon: int = 10_000
    seed: int = 0
    trials: int = 1
    stride: int | None = None
    threshold: float | None = None
    early_exit: bool = False

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.stride is not None and self.stride < 1:
            raise ValueError("stride must be >= 1")
        if self.threshold is not None and self.threshold <= 0:
            raise ValueError("threshold must be positive")
        if self.init.kind not in ("box", "zeros", "target", "explicit"):
            raise ValueError(f"unknown init kind {self.init.kind!r}")
        if self.init.kind == "box" and self.init.high < self.init.low:
            raise ValueError("init.high must be >= init.low")

    # -- derived objects

    @property
    def n(self) -> int:
        return self.graph.node_count()

    @property
    def l(self) -> int:
        if isinstance(self.target, str):
            return self.dim
        return len(self.target)

    def mu(self) -> np.ndarray:
        if isinstance(self.target, str):
            if self.target != "zeros":
                raise ValueError(f"unknown target {self.target!r}")
            return np.zeros(self.dim)
        return as_target(self.target)

    def sequence(self) -> GraphSequence:
        return self.graph.sequence()

    def schedule(self) -> MeasurementSchedule:
        nodes = self.measurement.nodes
        if nodes is None:
            if self.graph.family in ("random", "file"):
                nodes = (0,)
            else:
                nodes = (default_sampler(self.graph.family, self.n),)
        if any(not 0 <= i < self.n for i in nodes):
            raise ValueError(f"measuring nodes {nodes} out of range for n={self.n}")
        return MeasurementSchedule.periodic(nodes, self.measurement.period, self.measurement.rotate)

    def noise_model(self) -> NoiseModel:
        return NoiseModel(seed=self.seed, **dataclasses.asdict(self.noise))

    def stepsize_schedule(self) -> StepsizeSchedule:
        return StepsizeSchedule(self.stepsize.epsilon, self.stepsize.offset)

    def effective_stride(self) -> int:
        return self.stride if self.stride is not None else max(1, self.horizon // 10_000)

    def initial_state(self, rng: np.random.Generator) -> np.ndarray:
        n, l = self.n, self.l
        kind = self.init.kind
        if kind == "box":
            return rng.uniform(self.init.low, self.init.high, (n, l))
        if kind == "zeros":
            return np.zeros((n, l))
        if kind == "target":
            return np.tile(self.mu(), (n, 1))
        v = np.array(self.init.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.shape != (n, l):
            raise ValueError(f"explicit init has shape {v.shape}, expected {(n, l)}")
        return v

    # -- serialization

    def to_dict(self) -> dict[str, Any]:
        d = dataclasses.asdict(self)
        return json.loads(json.dumps(d))

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ExperimentConfig":
        data = dict(data)
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        kwargs: dict[str, Any] = {}
        for key, value in data.items():
            if key in _SECTIONS:
                section = _SECTIONS[key]
                value = dict(value or {})
                fields = {f.name for f in dataclasses.fields(section)}
                bad = set(value) - fields
                if bad:
                    raise ValueError(f"unknown keys in [{key}]: {sorted(bad)}")
                if key == "measurement" and value.get("nodes") is not None:
                    value["nodes"] = tuple(int(i) for i in value["nodes"])
                if key == "init" and value.get("values") is not None:
                    value["values"] = _freeze(value["values"])
                kwargs[key] = section(**value)
            elif key == "target" and not isinstance(value, str):
                kwargs[key] = tuple(float(x) for x in np.atleast_1d(value))
            else:
                kwargs[key] = value
        return cls(**kwargs)

    def replace(self, **sections) -> "ExperimentConfig":
        """Return a copy; nested sections accept dicts of field overrides."""
        updates = {}
        for key, value in sections.items():
            if key in _SECTIONS and isinstance(value, dict):
                updates[key] = dataclasses.replace(getattr(self, key), **value)
            else:
                updates[key] = value
        return dataclasses.replace(self, **updates)

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _freeze(values):
    if isinstance(values, (list, tuple)):
        return tuple(_freeze(v) for v in values)
    return float(values)


# --------------------------------------------------------------------------
# results


@dataclass(eq=False)
class RunResult:
    t: np.ndarray
    Z: np.ndarray
    max_err: np.ndarray
    final_v: np.ndarray
    final_t: int
    convergence_time: int | None
    seed: int
    trial: int
    config: ExperimentConfig

    @property
    def config_digest(self) -> str:
        return self.config.digest()


@dataclass(eq=False)
class TrialAggregate:
    """Per-trial trajectories on a shared time grid, kept so aggregates merge exactly."""

    t: np.ndarray
    Z: np.ndarray  # trials x points
    max_err: np.ndarray
    trial_index: np.ndarray
    convergence_times: list[int | None]
    config: ExperimentConfig

    @property
    def trials(self) -> int:
        return int(self.trial_index.size)

    @property
    def Z_mean(self) -> np.ndarray:
        return self.Z.mean(axis=0)

    @property
    def Z_se(self) -> np.ndarray:
        return _standard_error(self.Z)

    @property
    def err_mean(self) -> np.ndarray:
        return self.max_err.mean(axis=0)

    @property
    def err_se(self) -> np.ndarray:
        return _standard_error(self.max_err)

    @property
    def config_digest(self) -> str:
        return self.config.digest()

    def median_convergence_time(self) -> float:
        """Median with unreached trials counted as infinite."""
        vals = [math.inf if c is None else c for c in self.convergence_times]
        return float(np.median(vals))

    def merge(self, other: "TrialAggregate") -> "TrialAggregate":
        if self.t.shape != other.t.shape or np.any(self.t != other.t):
            raise ValueError("aggregates use different time grids")
        if set(self.trial_index.tolist()) & set(other.trial_index.tolist()):
            raise ValueError("aggregates share trial indices")
        idx = np.concatenate([self.trial_index, other.trial_index])
        order = np.argsort(idx, kind="stable")
        conv = list(self.convergence_times) + list(other.convergence_times)
        return TrialAggregate(
            self.t,
            np.vstack([self.Z, other.Z])[order],
            np.vstack([self.max_err, other.max_err])[order],
            idx[order],
            [conv[i] for i in order],
            self.config,
        )


def _standard_error(x: np.ndarray) -> np.ndarray:
    if x.shape[0] < 2:
        return np.zeros(x.shape[1])
    return x.std(axis=0, ddof=1) / math.sqrt(x.shape[0])


# --------------------------------------------------------------------------
# engine


def trial_rng(master_seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(trial,)))


class _SnapshotOps:
    """Dense pieces of one snapshot, for small batched computations."""

    def __init__(self, g: GraphSnapshot, noise: NoiseModel):
        self.g = g
        self.a0 = 0.25 * np.asarray(g.edge_weights)
        self.a0[np.diag_indices(g.n)] = 1.0 - self.a0.sum(axis=1)
        self.offset_map = None
        if noise.sigma_prime > 0 and g.num_edges:
            packed = _pack([g], noise)
            off_row, off_draw, off_coef = packed[5:8]
            m = np.zeros((g.n, noise.draw_counts(g, 0, 1)[0]))
            np.add.at(m, (off_row, off_draw), off_coef)
            self.offset_map = m


def _pack(graphs: Sequence[GraphSnapshot], noise: NoiseModel):
    """Concatenated CSR and offset-noise lists of ``graphs`` in the kernel's layout.

    Directed edges of each graph are ordered by source then destination,
    matching the noise draw order. With symmetric offset noise, draw ``p``
    of a graph belongs to its ``p``-th pair with ``i < j`` and enters row
    ``j`` with the opposite sign.
    """
    n = graphs[0].n
    u = len(graphs)
    sizes = np.array([g.num_edges for g in graphs], dtype=np.int64)
    e = np.concatenate([g.edge_array for g in graphs]) if sizes.sum() else np.zeros((0, 2), np.int64)
    gid_e = np.repeat(np.arange(u), sizes)
    src = np.concatenate([e[:, 0], e[:, 1]])
    dst = np.concatenate([e[:, 1], e[:, 0]])
    gid = np.concatenate([gid_e, gid_e])
    order = np.lexsort((dst, src, gid))
    src, dst, gid = src[order], dst[order], gid[order]
    deg = np.bincount(gid_e * n + e[:, 0], minlength=u * n) + np.bincount(gid_e * n + e[:, 1], minlength=u * n)
    w = 0.25 / np.maximum(deg[gid * n + src], deg[gid * n + dst])

    counts = np.bincount(gid * n + src, minlength=u * n).reshape(u, n)
    ptr = np.zeros((u, n + 1), dtype=np.int64)
    np.cumsum(counts, axis=1, out=ptr[:, 1:])
    dir_sizes = 2 * sizes
    base = np.zeros(u, dtype=np.int64)
    np.cumsum(dir_sizes[:-1], out=base[1:])
    local = np.arange(src.size, dtype=np.int64) - base[gid]

    if noise.symmetric_offset_noise:
        fwd = np.flatnonzero(src < dst)
        fwd_base = np.zeros(u, dtype=np.int64)
        np.cumsum(sizes[:-1], out=fwd_base[1:])
        draws = np.arange(fwd.size, dtype=np.int64) - fwd_base[gid[fwd]]
        rows = np.concatenate([src[fwd], dst[fwd]])
        cols = np.concatenate([draws, draws])
        coef = np.concatenate([w[fwd], -w[fwd]])
        grp = np.argsort(np.concatenate([gid[fwd], gid[fwd]]), kind="stable")
        off_row, off_draw, off_coef = rows[grp], cols[grp], coef[grp]
        off_sizes = dir_sizes
    else:
        off_row, off_draw, off_coef = src, local, w
        off_sizes = dir_sizes
    off_ptr = np.zeros(u + 1, dtype=np.int64)
    np.cumsum(off_sizes, out=off_ptr[1:])
    return (
        ptr.ravel(), base, np.ascontiguousarray(dst), np.ascontiguousarray(w),
        off_ptr, np.ascontiguousarray(off_row), np.ascontiguousarray(off_draw), np.ascontiguousarray(off_coef),
    )


def _simulate(config: ExperimentConfig, trials: Sequence[int]) -> list[RunResult]:
    from . import _kernel

    n, l = config.n, config.l
    K = len(trials)
    mu = config.mu()
    seq = config.sequence()
    if seq.n != n:
        raise ValueError(f"graph sequence has {seq.n} nodes, config says {n}")
    sched = config.schedule()
    noise = config.noise_model()
    steps = config.stepsize_schedule()
    stride = config.effective_stride()
    horizon = config.horizon
    threshold = -1.0 if config.threshold is None else float(config.threshold)

    rngs = [trial_rng(config.seed, k) for k in trials]
    V = np.ascontiguousarray(np.concatenate([config.initial_state(r) for r in rngs], axis=1))
    mu_cols = np.tile(mu, K)
    conv = np.full(K, -1, dtype=np.int64)

    z0 = np.empty(K)
    e0 = np.empty(K)
    _kernel._errors(V, mu_cols, K, l, z0, e0)
    if not np.all(np.isfinite(z0)):
        raise FloatingPointError("estimates overflowed at t=1")
    ts, zs, errs = [np.array([1])], [z0[None, :]], [e0[None, :]]
    if threshold >= 0:
        conv[e0 < threshold] = 1
    if steps(1) >= 1.0:
        warnings.warn("stepsize equals 1 at t=1", StepsizeWarning, stacklevel=3)

    t = 1
    done = threshold >= 0 and config.early_exit and bool(np.all(conv >= 0))
    while t < horizon and not done:
        count = min(_CHUNK_STEPS, horizon - t)
        probe = sum(noise.draw_counts(seq(t), len(sched(t)), l)) * K
        if probe:
            count = max(1, min(count, _DRAW_BUDGET // probe))
        graphs = [seq(t + i) for i in range(count)]
        measuring = [sorted(set(sched(t + i))) for i in range(count)]

        order: dict[int, int] = {}
        unique: list[GraphSnapshot] = []
        gid = np.empty(count, dtype=np.int64)
        for i, g in enumerate(graphs):
            k = order.get(id(g))
            if k is None:
                k = order[id(g)] = len(unique)
                unique.append(g)
            gid[i] = k

        counts = np.array([noise.draw_counts(g, len(m), l) for g, m in zip(graphs, measuring)], dtype=np.int64)
        n_off, n_meas = counts[:, 0].copy(), counts[:, 1].copy()
        per_step = n_off + n_meas
        draw_start = np.concatenate([[0], np.cumsum(per_step)[:-1]]).astype(np.int64)
        total = int(per_step.sum())
        if total:
            block = np.ascontiguousarray(np.stack([noise.standard(r, total) for r in rngs]))
        else:
            block = np.zeros((K, 1))
        meas_ptr = np.concatenate([[0], np.cumsum([len(m) for m in measuring])]).astype(np.int64)
        meas_node = np.array([i for m in measuring for i in m], dtype=np.int64)

        rec_t = np.empty(count, dtype=np.int64)
        rec_z = np.empty((count, K))
        rec_e = np.empty((count, K))
        taken, nrec, done = _kernel.advance(
            V, mu_cols, K, l, gid, steps.values(t, count), *_pack(unique, noise),
            meas_ptr, meas_node, draw_start, n_off, n_meas, block,
            float(noise.sigma), float(noise.sigma_prime),
            t, horizon, stride, threshold, bool(config.early_exit), conv,
            rec_t, rec_z, rec_e,
        )
        t += taken
        if taken < count and not done or not np.all(np.isfinite(V)):
            raise FloatingPointError(f"estimates overflowed at t={t}")
        ts.append(rec_t[:nrec])
        zs.append(rec_z[:nrec])
        errs.append(rec_e[:nrec])

    t_arr = np.concatenate(ts)
    Z = np.concatenate(zs).T
    E = np.concatenate(errs).T
    final = V.reshape(n, K, l)
    return [
        RunResult(
            t_arr, Z[k], E[k], final[:, k, :].copy(), t,
            int(conv[k]) if conv[k] >= 0 else None, config.seed, trial, config,
        )
        for k, trial in enumerate(trials)
    ]


def run_trials(config: ExperimentConfig, trials: Iterable[int]) -> list[RunResult]:
    """Simulate the given trial indices together."""
    return _simulate(config, list(trials))


def run(config: ExperimentConfig) -> RunResult:
    """One trial (index 0) of ``config``."""
    return _simulate(config, [0])[0]


def monte_carlo(config: ExperimentConfig, trial_range: tuple[int, int] | None = None) -> TrialAggregate:
    """Run ``config.trials`` trials (or ``range(*trial_range)``) and aggregate them."""
    start, stop = trial_range if trial_range is not None else (0, config.trials)
    trials = list(range(start, stop))
    if not trials:
        raise ValueError("no trials to run")
    results = _simulate(config, trials)
    return TrialAggregate(
        results[0].t,
        np.stack([r.Z for r in results]),
        np.stack([r.max_err for r in results]),
        np.asarray(trials),
        [r.convergence_time for r in results],
        config,
    )


def convergence_time(config: ExperimentConfig, threshold: float) -> int | None:
    """First ``t`` with sup-norm error below ``threshold``; ``None`` if never reached."""
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    cfg = dataclasses.replace(config, threshold=threshold, early_exit=True)
    return run(cfg).convergence_time


# --------------------------------------------------------------------------
# one-step statistics


def one_step_samples(
    state: ProtocolState,
    g: GraphSnapshot,
    measuring: Iterable[int],
    sched: StepsizeSchedule,
    noise: NoiseModel,
    target,
    draws: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """``draws`` independent samples of ``Z(t+1)`` from the fixed state ``state``."""
    n, l = state.n, state.l
    mu = as_target(target, l)
    s = sorted(set(measuring))
    delta = sched(state.t)
    ops = _SnapshotOps(g, noise)
    base = ops.a0 @ state.v - state.v
    if s:
        base[s] += 0.25 * (mu - state.v[s])
    mean_next = state.v + delta * base
    out = np.empty(draws)
    batch = 8192
    for lo in range(0, draws, batch):
        m = min(batch, draws - lo)
        v = np.repeat(mean_next[:, :, None], m, axis=2)
        if ops.offset_map is not None:
            w = noise.standard(rng, (ops.offset_map.shape[1], l, m))
            v += delta * noise.sigma_prime * np.einsum("ij,jlm->ilm", ops.offset_map, w)
        if s and noise.sigma > 0:
            v[s] += delta * 0.25 * noise.sigma * noise.standard(rng, (len(s), l, m))
        out[lo : lo + m] = ((v - mu[None, :, None]) ** 2).sum(axis=(0, 1))
    return out


def expected_next_variance(
    state: ProtocolState,
    g: GraphSnapshot,
    measuring: Iterable[int],
    sched: StepsizeSchedule,
    noise: NoiseModel,
    target,
) -> float:
    """Exact ``E[Z(t+1) | v(t)]``: deterministic part plus the noise energy."""
    from .protocol import NoiseDraws, step_matrix_form

    l = state.l
    mu = as_target(target, l)
    s = sorted(set(measuring))
    zero = NoiseDraws(np.zeros((2 * g.num_edges, l)), np.zeros((len(s), l)))
    q = step_matrix_form(state, g, s, sched, zero, mu, strict=False).v
    delta = sched(state.t)
    r_energy = len(s) * l * noise.sigma**2 / 16.0
    src, dst = g.directed_edges
    c_energy = l * noise.sigma_prime**2 / 16.0 * float((g.edge_weights[src, dst] ** 2).sum())
    return float(((q - mu) ** 2).sum()) + delta**2 * (r_energy + c_energy)


# --------------------------------------------------------------------------
# export


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def export(result: RunResult | TrialAggregate, fmt: str, path: str | Path) -> None:
    """Write a run or aggregate as CSV or JSON.

    CSV files start with a ``# config_digest=...`` comment line followed by
    the header; JSON files echo the full resolved config.
    """
    path = Path(path)
    digest = result.config_digest
    if isinstance(result, RunResult):
        header = CSV_RUN_HEADER
        rows = [(t, z, e) for t, z, e in zip(result.t, result.Z, result.max_err)]
    else:
        header = CSV_AGGREGATE_HEADER
        rows = list(
            zip(result.t, result.Z_mean, result.Z_se, result.err_mean, result.err_se, [result.trials] * len(result.t))
        )
    if fmt == "csv":
        with path.open("w", newline="") as fh:
            fh.write(f"# config_digest={digest}\n")
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([_fmt(x) for x in row])
    elif fmt == "json":
        payload: dict[str, Any] = {"config_digest": digest, "config": result.config.to_dict()}
        if isinstance(result, RunResult):
            payload.update(seed=result.seed, trial=result.trial, convergence_time=result.convergence_time)
        else:
            payload.update(
                trials=result.trials,
                trial_index=result.trial_index.tolist(),
                convergence_times=result.convergence_times,
            )
        payload["trajectory"] = {
            name: [int(v) if name in ("t", "trials") else float(v) for v in col]
            for name, col in zip(header, zip(*rows)) if rows
        } or {name: [] for name in header}
        path.write_text(json.dumps(payload, indent=1) + "\n")
    else:
        raise ValueError(f"unknown export format {fmt!r}")


def read_csv(path: str | Path) -> dict[str, np.ndarray]:
    """Read an exported CSV back into columns (``t`` and ``trials`` as integers)."""
    with Path(path).open() as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader)
    cols: list[list[str]] = [[] for _ in header]
    for row in reader:
        for c, v in zip(cols, row):
            c.append(v)
    out = {}
    for name, c in zip(header, cols):
        if name in ("t", "trials"):
            out[name] = np.asarray([int(v) for v in c], dtype=np.int64)
        else:
            out[name] = np.asarray([float(v) for v in c], dtype=float)
    return out
