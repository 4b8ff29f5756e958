"""Learning dynamics: stepsizes, measurement schedules, noise and the update.

Each agent ``i`` keeps an estimate ``v_i`` of the unknown vector ``mu``. In
one step it moves toward noisy observations of its neighbors' offsets, with
Metropolis weights scaled by ``Delta(t)/4``, and agents holding a
measurement also move toward ``mu + noise``.

Two implementations of the step are provided. :func:`step` follows the
per-agent rule literally; :func:`step_matrix_form` assembles the protocol
matrix and the noise vectors and applies them in one affine map. Given the
same primitive noise draws the two agree to rounding.

Noise draw order (per step): for every agent ``i`` in index order, one
``l``-vector ``w_ij`` per neighbor ``j`` in index order; then one
``l``-vector ``w_i`` for every measuring agent in index order. Draws whose
scale is zero are skipped entirely, so a noiseless observation channel
consumes nothing from the stream.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .graph import GraphSnapshot, protocol_matrix

__all__ = [
    "StepsizeSchedule",
    "MeasurementSchedule",
    "NoiseModel",
    "NoiseDraws",
    "ProtocolState",
    "StepsizeWarning",
    "as_target",
    "stepsize",
    "observe_offset",
    "step",
    "step_matrix_form",
    "variance",
    "max_error",
    "DISTRIBUTIONS",
]

DISTRIBUTIONS = ("gaussian", "uniform", "rademacher")


class StepsizeWarning(UserWarning):
    """A stepsize of exactly 1 was used; the one-step decrease guarantee needs < 1."""


@dataclass(frozen=True)
class StepsizeSchedule:
    """``Delta(t) = 1 / (t + offset)^(1 - epsilon)``."""

    epsilon: float
    offset: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.offset < 0:
            raise ValueError(f"offset must be nonnegative, got {self.offset}")

    def __call__(self, t: int) -> float:
        return stepsize(self, t)

    def values(self, t0: int, count: int) -> np.ndarray:
        t = np.arange(t0, t0 + count, dtype=float)
        return 1.0 / (t + self.offset) ** (1.0 - self.epsilon)


def stepsize(sched: StepsizeSchedule, t: int) -> float:
    if t < 1:
        raise ValueError(f"time starts at 1, got {t}")
    return 1.0 / (t + sched.offset) ** (1.0 - sched.epsilon)


@dataclass(frozen=True, eq=False)
class MeasurementSchedule:
    """Which agents measure at time ``t``.

    ``T`` is the largest gap between consecutive measurement times (every
    step measured means ``T = 1``), and ``M`` the largest number of agents
    measuring at once.
    """

    generator: Callable[[int], tuple[int, ...]]
    T: int
    M: int
    description: dict | None = None

    def __call__(self, t: int) -> tuple[int, ...]:
        return self.generator(t)

    @classmethod
    def periodic(cls, nodes: Iterable[int], period: int = 1, rotate: bool = False) -> "MeasurementSchedule":
        """Measure at ``t = 1, 1 + period, 1 + 2 period, ...``.

        All of ``nodes`` measure together, or with ``rotate`` one node at a
        time in turn.
        """
        nodes = tuple(sorted({int(i) for i in nodes}))
        if not nodes:
            raise ValueError("a measurement schedule needs at least one node")
        if period < 1:
            raise ValueError("period must be >= 1")

        def gen(t: int) -> tuple[int, ...]:
            k, r = divmod(t - 1, period)
            if r:
                return ()
            return (nodes[k % len(nodes)],) if rotate else nodes

        desc = {"nodes": list(nodes), "period": period, "rotate": rotate}
        return cls(gen, period, 1 if rotate else len(nodes), desc)

    def validate(self, n: int, horizon: int) -> None:
        """Check node range, ``M`` and the gap bound over ``1..horizon``."""
        last = None
        for t in range(1, horizon + 1):
            s = self(t)
            if any(not 0 <= i < n for i in s):
                raise ValueError(f"measuring node out of range at t={t}: {s}")
            if len(s) > self.M:
                raise ValueError(f"{len(s)} agents measure at t={t}, above M={self.M}")
            if s:
                if last is None and t != 1:
                    raise ValueError("the first measurement must happen at t = 1")
                if last is not None and t - last > self.T:
                    raise ValueError(f"gap {t - last} before t={t} exceeds T={self.T}")
                last = t
        if self.M > n:
            raise ValueError("M cannot exceed n")


@dataclass(frozen=True)
class NoiseModel:
    """Zero-mean noise with per-entry standard deviation ``sigma`` for
    measurements and ``sigma_prime`` for offset observations.

    ``distribution`` only changes the shape: Gaussian, uniform on
    ``[-sqrt(3) s, sqrt(3) s]`` or ``+-s`` with equal probability.
    """

    sigma: float = 1.0
    sigma_prime: float = 0.0
    distribution: str = "gaussian"
    seed: int = 0
    symmetric_offset_noise: bool = False

    def __post_init__(self):
        if self.sigma < 0 or self.sigma_prime < 0:
            raise ValueError("noise standard deviations must be nonnegative")
        if self.distribution not in DISTRIBUTIONS:
            raise ValueError(f"unknown distribution {self.distribution!r}; choose from {DISTRIBUTIONS}")

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)

    def standard(self, rng: np.random.Generator, size) -> np.ndarray:
        """Zero-mean, unit-variance draws.

        Each entry consumes the stream sequentially, so one call of size
        ``a + b`` returns the same values as a call of size ``a`` followed
        by one of size ``b``.
        """
        if self.distribution == "gaussian":
            return rng.standard_normal(size)
        if self.distribution == "uniform":
            return rng.uniform(-np.sqrt(3.0), np.sqrt(3.0), size)
        return np.where(rng.random(size) < 0.5, -1.0, 1.0)

    def draw_counts(self, g: GraphSnapshot, n_measuring: int, l: int) -> tuple[int, int]:
        """Number of scalar offset and measurement draws one step consumes."""
        pairs = g.num_edges if self.symmetric_offset_noise else 2 * g.num_edges
        n_off = pairs * l if self.sigma_prime > 0 else 0
        n_meas = n_measuring * l if self.sigma > 0 else 0
        return n_off, n_meas

    def assemble(self, g: GraphSnapshot, n_measuring: int, l: int, flat: np.ndarray) -> "NoiseDraws":
        """Scale standardized draws (in stream order) into a :class:`NoiseDraws`."""
        n_off, n_meas = self.draw_counts(g, n_measuring, l)
        flat = np.asarray(flat, dtype=float)
        if flat.size != n_off + n_meas:
            raise ValueError(f"expected {n_off + n_meas} draws, got {flat.size}")
        src, dst = g.directed_edges
        offset = np.zeros((src.size, l))
        if n_off:
            raw = self.sigma_prime * flat[:n_off].reshape(-1, l)
            if self.symmetric_offset_noise:
                # one draw per i < j, in the same traversal order; w_ji = -w_ij
                fwd = np.flatnonzero(src < dst)
                offset[fwd] = raw
                lookup = {(int(src[k]), int(dst[k])): k for k in fwd}
                for k in np.flatnonzero(src > dst):
                    offset[k] = -offset[lookup[(int(dst[k]), int(src[k]))]]
            else:
                offset = raw
        measurement = np.zeros((n_measuring, l))
        if n_meas:
            measurement = self.sigma * flat[n_off:].reshape(n_measuring, l)
        return NoiseDraws(offset, measurement)

    def draw(self, rng: np.random.Generator | None, g: GraphSnapshot, measuring: Iterable[int], l: int) -> "NoiseDraws":
        measuring = sorted(set(measuring))
        n_off, n_meas = self.draw_counts(g, len(measuring), l)
        if n_off + n_meas == 0:
            return self.assemble(g, len(measuring), l, np.empty(0))
        if rng is None:
            raise ValueError("a random generator is needed when noise is nonzero")
        return self.assemble(g, len(measuring), l, self.standard(rng, n_off + n_meas))


@dataclass(frozen=True, eq=False)
class NoiseDraws:
    """Primitive noise of one step.

    ``offset[k]`` is ``w_ij`` for the k-th directed edge of
    ``GraphSnapshot.directed_edges``; ``measurement[s]`` is ``w_i`` for the
    s-th measuring agent in ascending order.
    """

    offset: np.ndarray
    measurement: np.ndarray


@dataclass(frozen=True, eq=False)
class ProtocolState:
    """Estimates ``v`` (one row per agent) at time ``t``."""

    v: np.ndarray
    t: int = 1

    def __post_init__(self):
        v = np.array(self.v, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2:
            raise ValueError("state must be an n x l matrix")
        if not np.all(np.isfinite(v)):
            raise FloatingPointError(f"non-finite estimate at t={self.t}")
        if self.t < 1:
            raise ValueError("time starts at 1")
        v.flags.writeable = False
        object.__setattr__(self, "v", v)

    @property
    def n(self) -> int:
        return self.v.shape[0]

    @property
    def l(self) -> int:
        return self.v.shape[1]


def as_target(mu, l: int | None = None) -> np.ndarray:
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    if mu.ndim != 1:
        raise ValueError("target must be a vector")
    if l is not None and mu.size != l:
        raise ValueError(f"target has dimension {mu.size}, state has {l}")
    if not np.all(np.isfinite(mu)):
        raise ValueError("target entries must be finite")
    return mu


def observe_offset(state: ProtocolState, i: int, j: int, noise: NoiseModel, rng: np.random.Generator | None = None) -> np.ndarray:
    """``v_j - v_i`` plus a fresh offset noise draw."""
    if i == j:
        raise ValueError("an agent does not observe itself")
    diff = state.v[j] - state.v[i]
    if noise.sigma_prime == 0:
        return diff.copy()
    if rng is None:
        raise ValueError("a random generator is needed when sigma_prime > 0")
    return diff + noise.sigma_prime * noise.standard(rng, state.l)


def _checked_stepsize(sched: StepsizeSchedule, t: int, strict: bool) -> float:
    delta = sched(t)
    if delta > 1.0:
        raise ValueError(f"stepsize {delta} > 1 at t={t}")
    if delta == 1.0:
        if strict:
            raise ValueError(f"stepsize reached 1 at t={t}; pass strict=False to allow it")
        warnings.warn(f"stepsize equals 1 at t={t}", StepsizeWarning, stacklevel=3)
    return delta


def step(
    state: ProtocolState,
    g: GraphSnapshot,
    measuring: Iterable[int],
    sched: StepsizeSchedule,
    noise: NoiseModel,
    target,
    rng: np.random.Generator | None = None,
    draws: NoiseDraws | None = None,
    strict: bool = True,
) -> ProtocolState:
    """Advance every agent by one step, agent by agent.

    Noise comes from ``draws`` if given, otherwise it is drawn from ``rng``
    in the documented order.
    """
    if g.n != state.n:
        raise ValueError(f"graph has {g.n} nodes, state has {state.n}")
    mu = as_target(target, state.l)
    measuring = sorted(set(int(i) for i in measuring))
    if any(not 0 <= i < state.n for i in measuring):
        raise ValueError(f"measuring node out of range: {measuring}")
    delta = _checked_stepsize(sched, state.t, strict)
    if draws is None:
        draws = noise.draw(rng, g, measuring, state.l)

    v = state.v
    deg = g.degrees
    new = v.copy()
    k = 0
    for i in range(state.n):
        acc = np.zeros(state.l)
        for j in g.neighbors[i]:
            o_ij = v[j] - v[i] + draws.offset[k]
            acc += o_ij / max(deg[i], deg[j])
            k += 1
        new[i] += 0.25 * delta * acc
    for s, i in enumerate(measuring):
        sample = mu + draws.measurement[s]
        new[i] += 0.25 * delta * (sample - v[i])
    return ProtocolState(new, state.t + 1)


def step_matrix_form(
    state: ProtocolState,
    g: GraphSnapshot,
    measuring: Iterable[int],
    sched: StepsizeSchedule,
    draws: NoiseDraws,
    target,
    strict: bool = True,
) -> ProtocolState:
    """Same update as :func:`step` written as
    ``v' = (1 - D) v + D A v + D b + D r + D c`` with ``D = Delta(t)``."""
    if g.n != state.n:
        raise ValueError(f"graph has {g.n} nodes, state has {state.n}")
    mu = as_target(target, state.l)
    measuring = sorted(set(int(i) for i in measuring))
    delta = _checked_stepsize(sched, state.t, strict)
    a = protocol_matrix(g, measuring).values
    n, l = state.n, state.l
    b = np.zeros((n, l))
    r = np.zeros((n, l))
    if measuring:
        b[measuring] = 0.25 * mu
        r[measuring] = 0.25 * draws.measurement
    c = np.zeros((n, l))
    src, dst = g.directed_edges
    if src.size:
        wts = 0.25 * g.edge_weights[src, dst]
        np.add.at(c, src, wts[:, None] * draws.offset)
    v = state.v
    new = (1.0 - delta) * v + delta * (a @ v) + delta * b + delta * r + delta * c
    return ProtocolState(new, state.t + 1)


def variance(state: ProtocolState | np.ndarray, target) -> float:
    """``Z = sum_i |v_i - mu|^2``."""
    v = state.v if isinstance(state, ProtocolState) else np.atleast_2d(np.asarray(state, dtype=float))
    if v.ndim == 2 and v.shape[0] == 1 and np.ndim(state) == 1:
        v = v.T
    mu = as_target(target, v.shape[1])
    return float(((v - mu) ** 2).sum())


def max_error(state: ProtocolState | np.ndarray, target) -> float:
    """``max_i |v_i - mu|_inf``."""
    v = state.v if isinstance(state, ProtocolState) else np.atleast_2d(np.asarray(state, dtype=float))
    if v.ndim == 2 and v.shape[0] == 1 and np.ndim(state) == 1:
        v = v.T
    mu = as_target(target, v.shape[1])
    return float(np.abs(v - mu).max(initial=0.0))
