"""Communication graphs: static snapshots, weight matrices and time-varying sequences.

Nodes are labelled ``0 .. n-1``. Snapshots are immutable; derived quantities
(degrees, adjacency lists, dense weight pieces) are computed once and cached.
"""

from __future__ import annotations

import functools
import itertools
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

__all__ = [
    "GraphError",
    "GraphSnapshot",
    "WeightMatrix",
    "GraphSequence",
    "build_graph",
    "metropolis_matrix",
    "protocol_matrix",
    "generate",
    "random_sequence",
    "verify_b_connectivity",
    "is_connected",
    "read_graph",
    "write_graph",
    "FAMILIES",
]


class GraphError(ValueError):
    """Raised for malformed graphs, bad sizes and invalid node references."""


@dataclass(frozen=True)
class GraphSnapshot:
    """One undirected graph without self-loops.

    ``edges`` holds each undirected edge once as a pair ``(i, j)`` with
    ``i < j``, sorted lexicographically.
    """

    n: int
    edges: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        if self.n < 1:
            raise GraphError(f"node count must be positive, got {self.n}")
        normalized = set()
        for i, j in self.edges:
            i, j = int(i), int(j)
            if i == j:
                raise GraphError(f"self-loop at node {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise GraphError(f"edge ({i}, {j}) has an endpoint outside [0, {self.n})")
            normalized.add((min(i, j), max(i, j)))
        object.__setattr__(self, "edges", tuple(sorted(normalized)))

    @cached_property
    def neighbors(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        return tuple(tuple(sorted(a)) for a in adj)

    @cached_property
    def edge_array(self) -> np.ndarray:
        """``edges`` as an ``(m, 2)`` integer array."""
        e = np.array(self.edges, dtype=np.int64).reshape(-1, 2)
        e.flags.writeable = False
        return e

    @cached_property
    def degrees(self) -> np.ndarray:
        deg = np.bincount(self.edge_array.ravel(), minlength=self.n).astype(np.int64)
        deg.flags.writeable = False
        return deg

    def degree(self, i: int) -> int:
        return int(self.degrees[i])

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        for i, j in self.edges:
            a[i, j] = a[j, i] = 1.0
        a.flags.writeable = False
        return a

    @cached_property
    def edge_weights(self) -> np.ndarray:
        """Dense matrix with ``1/max(d_i, d_j)`` on edges and zeros elsewhere."""
        w = np.zeros((self.n, self.n))
        deg = self.degrees
        for i, j in self.edges:
            w[i, j] = w[j, i] = 1.0 / max(deg[i], deg[j])
        w.flags.writeable = False
        return w

    @cached_property
    def directed_edges(self) -> tuple[np.ndarray, np.ndarray]:
        """Ordered pairs ``(i, j)`` for every neighbor ``j`` of ``i``.

        Order: agents ascending, and for each agent its neighbors ascending.
        This is the order in which offset noise is drawn.
        """
        e = self.edge_array
        src = np.concatenate([e[:, 0], e[:, 1]])
        dst = np.concatenate([e[:, 1], e[:, 0]])
        order = np.lexsort((dst, src))
        return src[order], dst[order]

    @cached_property
    def directed_weights(self) -> np.ndarray:
        """``1/max(d_i, d_j)`` aligned with :attr:`directed_edges`."""
        src, dst = self.directed_edges
        return 1.0 / np.maximum(self.degrees[src], self.degrees[dst])

    def is_connected(self) -> bool:
        return is_connected(self.n, self.edges)

    @classmethod
    def _from_sorted(cls, n: int, edge_array: np.ndarray) -> "GraphSnapshot":
        # skips validation: rows must be unique, i < j, lexicographically sorted
        g = object.__new__(cls)
        object.__setattr__(g, "n", n)
        object.__setattr__(g, "edges", tuple(map(tuple, edge_array.tolist())))
        edge_array.flags.writeable = False
        g.__dict__["edge_array"] = edge_array
        return g

    def __repr__(self) -> str:
        return f"GraphSnapshot(n={self.n}, m={len(self.edges)})"


@dataclass(frozen=True, eq=False)
class WeightMatrix:
    """A dense ``n x n`` weight matrix tagged with how it was built."""

    values: np.ndarray
    kind: str

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.values
        return self.values.astype(dtype)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def row_sums(self) -> np.ndarray:
        return self.values.sum(axis=1)


def build_graph(n: int, edges: Iterable[Sequence[int]] = ()) -> GraphSnapshot:
    """Build a validated snapshot; duplicate and reversed edges collapse."""
    return GraphSnapshot(int(n), tuple((int(e[0]), int(e[1])) for e in edges))


def metropolis_matrix(g: GraphSnapshot) -> WeightMatrix:
    """Stochastic symmetric matrix with ``1/max(d_i, d_j)`` on edges."""
    w = np.array(g.edge_weights)
    w[np.diag_indices(g.n)] = 1.0 - w.sum(axis=1)
    return WeightMatrix(w, "metropolis")


def protocol_matrix(g: GraphSnapshot, measuring: Iterable[int] = ()) -> WeightMatrix:
    """Matrix of the deterministic part of one protocol step.

    Off-diagonal entries are ``1/(4 max(d_i, d_j))`` on edges. Rows of
    non-measuring nodes sum to 1, rows of measuring nodes to 3/4.
    """
    mask = _measuring_mask(g.n, measuring)
    a = 0.25 * np.array(g.edge_weights)
    a[np.diag_indices(g.n)] = 1.0 - a.sum(axis=1) - 0.25 * mask
    return WeightMatrix(a, "protocol")


def _measuring_mask(n: int, measuring: Iterable[int]) -> np.ndarray:
    mask = np.zeros(n)
    for i in measuring:
        i = int(i)
        if not 0 <= i < n:
            raise GraphError(f"measuring node {i} outside [0, {n})")
        mask[i] = 1.0
    return mask


def is_connected(n: int, edges: Iterable[tuple[int, int]]) -> bool:
    adj: list[list[int]] = [[] for _ in range(n)]
    for i, j in edges:
        adj[i].append(j)
        adj[j].append(i)
    seen = [False] * n
    seen[0] = True
    queue = deque([0])
    count = 1
    while queue:
        u = queue.popleft()
        for w in adj[u]:
            if not seen[w]:
                seen[w] = True
                count += 1
                queue.append(w)
    return count == n


# --------------------------------------------------------------------------
# named families


def _complete(n: int) -> list[tuple[int, int]]:
    return list(itertools.combinations(range(n), 2))


def _line(n: int) -> list[tuple[int, int]]:
    return [(i, i + 1) for i in range(n - 1)]


def _star(n: int) -> list[tuple[int, int]]:
    return [(0, j) for j in range(1, n)]


def _ring(n: int) -> list[tuple[int, int]]:
    if n < 3:
        raise GraphError("ring needs n >= 3")
    return _line(n) + [(0, n - 1)]


def _lollipop(n: int) -> list[tuple[int, int]]:
    # clique on 0..h-1, stem h-1 -> h -> ... -> n-1; node n-1 is the stem end
    if n < 4 or n % 2:
        raise GraphError(f"lollipop needs an even n >= 4, got {n}")
    h = n // 2
    return _complete(h) + [(i, i + 1) for i in range(h - 1, n - 1)]


def _grid2d(rows: int, cols: int) -> list[tuple[int, int]]:
    edges = []
    for r in range(rows):
        for c in range(cols):
            u = r * cols + c
            if c + 1 < cols:
                edges.append((u, u + 1))
            if r + 1 < rows:
                edges.append((u, u + cols))
    return edges


FAMILIES = ("complete", "line", "star", "ring", "lollipop", "grid2d")


def generate(family: str, n: int | tuple[int, int]) -> GraphSnapshot:
    """Build a named topology.

    ``grid2d`` takes ``(rows, cols)``; every other family takes ``n >= 2``.
    Star center is node 0; line endpoints are 0 and n-1; the lollipop's
    clique is ``0..n/2-1`` and its stem ends at node n-1.
    """
    if family == "grid2d":
        rows, cols = (n, n) if isinstance(n, (int, np.integer)) else n
        if rows < 1 or cols < 1 or rows * cols < 2:
            raise GraphError(f"grid2d needs at least 2 nodes, got {rows}x{cols}")
        return build_graph(rows * cols, _grid2d(rows, cols))
    builders: dict[str, Callable[[int], list]] = {
        "complete": _complete,
        "line": _line,
        "star": _star,
        "ring": _ring,
        "lollipop": _lollipop,
    }
    if family not in builders:
        raise GraphError(f"unknown graph family {family!r}; choose from {FAMILIES}")
    if not isinstance(n, (int, np.integer)) or n < 2:
        raise GraphError(f"{family} needs an integer n >= 2, got {n!r}")
    return build_graph(int(n), builders[family](int(n)))


def default_sampler(family: str, n: int) -> int:
    """The node that samples in the reference experiments for ``family``."""
    return 0 if family in ("star", "complete", "grid2d", "ring") else n - 1


# --------------------------------------------------------------------------
# sequences


@dataclass(frozen=True, eq=False)
class GraphSequence:
    """Graphs ``G(t)`` for ``t = 1, 2, ...`` with a declared window ``B``."""

    generator: Callable[[int], GraphSnapshot]
    n: int
    b_window: int = 1
    declared_d_max: int | None = None
    description: dict = field(default_factory=dict)

    def __call__(self, t: int) -> GraphSnapshot:
        if t < 1:
            raise ValueError(f"time starts at 1, got {t}")
        return self.generator(t)

    def d_max(self, horizon: int | None = None) -> int:
        """Largest degree seen up to ``horizon`` (or the declared value)."""
        if horizon is None:
            if self.declared_d_max is None:
                raise ValueError("no declared d_max; pass a horizon to scan")
            return self.declared_d_max
        return max(int(self(t).degrees.max(initial=0)) for t in range(1, horizon + 1))

    @classmethod
    def static(cls, g: GraphSnapshot) -> "GraphSequence":
        return cls(lambda t: g, g.n, 1, int(g.degrees.max(initial=0)), {"kind": "static"})

    @classmethod
    def cycle(cls, snapshots: Sequence[GraphSnapshot], b_window: int) -> "GraphSequence":
        """Repeat ``snapshots`` periodically, starting at t = 1."""
        snaps = tuple(snapshots)
        if not snaps:
            raise ValueError("need at least one snapshot")
        n = snaps[0].n
        if any(s.n != n for s in snaps):
            raise GraphError("all snapshots must have the same node count")
        d = max(int(s.degrees.max(initial=0)) for s in snaps)
        return cls(lambda t: snaps[(t - 1) % len(snaps)], n, b_window, d, {"kind": "cycle"})


_WINDOW_BLOCK = 256


def random_sequence(n: int, B: int, edge_budget: int | None = None, seed: int = 0) -> GraphSequence:
    """A B-connected random sequence.

    Window ``k`` covers ``t = kB+1 .. (k+1)B``. Its union is a random spanning
    tree plus ``edge_budget - (n-1)`` extra random pairs, each edge placed at
    a uniformly random step of the window. Windows come in blocks of 256,
    each block drawn from its own generator seeded by ``(seed, block)``, so
    any ``G(t)`` is available without replaying earlier blocks.
    """
    if B < 1:
        raise ValueError("B must be >= 1")
    if n < 2:
        raise GraphError("random_sequence needs n >= 2")
    if edge_budget is None:
        edge_budget = n - 1
    if edge_budget < n - 1:
        raise ValueError(f"edge_budget must be at least n-1 = {n - 1}")
    n_pairs = n * (n - 1) // 2
    extra_count = min(edge_budget, n_pairs) - (n - 1)
    pair_i, pair_j = np.triu_indices(n, 1)
    pair_id = np.zeros((n, n), dtype=np.int64)
    pair_id[pair_i, pair_j] = np.arange(n_pairs)
    W = _WINDOW_BLOCK

    @functools.lru_cache(maxsize=4)
    def block(kb: int) -> list[GraphSnapshot]:
        rng = np.random.default_rng([seed, kb])
        order = rng.permuted(np.tile(np.arange(n), (W, 1)), axis=1)
        # node order[w, i] attaches to a uniformly chosen earlier node
        idx = (rng.random((W, n - 1)) * np.arange(1, n)).astype(np.int64)
        parents = np.take_along_axis(order, idx, axis=1)
        child = order[:, 1:]
        ids = pair_id[np.minimum(child, parents), np.maximum(child, parents)]
        if extra_count > 0:
            taken = np.zeros((W, n_pairs), dtype=bool)
            np.put_along_axis(taken, ids, True, axis=1)
            keys = np.where(taken, np.inf, rng.random((W, n_pairs)))
            extra = np.argsort(keys, axis=1)[:, :extra_count]
            ids = np.concatenate([ids, extra], axis=1)
        slots = rng.integers(B, size=ids.shape)
        group = (np.arange(W)[:, None] * B + slots).ravel()
        flat = ids.ravel()
        order_all = np.lexsort((flat, group))
        flat, group = flat[order_all], group[order_all]
        edges = np.stack([pair_i[flat], pair_j[flat]], axis=1)
        cuts = np.cumsum(np.bincount(group, minlength=W * B))[:-1]
        return [GraphSnapshot._from_sorted(n, part) for part in np.split(edges, cuts)]

    def gen(t: int) -> GraphSnapshot:
        k, b = divmod(t - 1, B)
        kb, w = divmod(k, W)
        return block(kb)[w * B + b]

    desc = {"kind": "random", "n": n, "B": B, "edge_budget": edge_budget, "seed": seed}
    return GraphSequence(gen, n, B, None, desc)


def verify_b_connectivity(seq: GraphSequence, B: int, horizon: int) -> bool:
    """True iff every complete window ``[kB+1, (k+1)B]`` within ``horizon`` has a connected union."""
    if horizon < B:
        raise ValueError("horizon must be at least B")
    for k in range(horizon // B):
        edges: set[tuple[int, int]] = set()
        for t in range(k * B + 1, (k + 1) * B + 1):
            edges.update(seq(t).edges)
        if not is_connected(seq.n, edges):
            return False
    return True


# --------------------------------------------------------------------------
# file format: first non-comment line is n, then one "i j" pair per line


def read_graph(path: str | Path) -> GraphSnapshot:
    n = None
    edges = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if n is None:
                if len(parts) != 1:
                    raise ValueError
                n = int(parts[0])
            else:
                if len(parts) != 2:
                    raise ValueError
                edges.append((int(parts[0]), int(parts[1])))
        except ValueError:
            raise GraphError(f"{path}:{lineno}: cannot parse {raw!r}") from None
    if n is None:
        raise GraphError(f"{path}: missing node count")
    return build_graph(n, edges)


def write_graph(g: GraphSnapshot, path: str | Path) -> None:
    lines = [str(g.n)] + [f"{i} {j}" for i, j in g.edges]
    Path(path).write_text("\n".join(lines) + "\n")
