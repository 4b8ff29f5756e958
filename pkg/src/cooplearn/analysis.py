"""Spectral and random-walk quantities of communication graphs.

Everything here is exact dense linear algebra: hitting times come from one
linear solve per target node, the sieve constant from one symmetric
eigensolve per node.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .graph import GraphError, GraphSnapshot, WeightMatrix, protocol_matrix

__all__ = [
    "SieveResult",
    "HittingTimes",
    "lazy_metropolis_transition",
    "hitting_times",
    "sieve_form_matrix",
    "sieve_constant",
    "sieve_lower_bound",
    "lambda_max",
    "norm_decrease_identity",
    "diameter",
    "matrix_graph",
]


@dataclass(frozen=True)
class SieveResult:
    value: float
    argmin_index: int
    lower_bound: float | None
    ordered: bool = True


@dataclass(frozen=True, eq=False)
class HittingTimes:
    matrix: np.ndarray

    @property
    def max_value(self) -> float:
        return float(self.matrix.max())

    def __getitem__(self, ij):
        return self.matrix[ij]


def lazy_metropolis_transition(g: GraphSnapshot) -> WeightMatrix:
    """Walk moving ``i -> j`` with probability ``1/(4 max(d_i, d_j))``."""
    return WeightMatrix(protocol_matrix(g).values, "lazy-walk")


def hitting_times(g: GraphSnapshot) -> HittingTimes:
    """Expected steps of the lazy Metropolis walk from every node to every node."""
    if not g.is_connected():
        raise GraphError("hitting times are infinite on a disconnected graph")
    p = lazy_metropolis_transition(g).values
    n = g.n
    h = np.zeros((n, n))
    idx = np.arange(n)
    for j in range(n):
        rest = idx[idx != j]
        sub = np.eye(n - 1) - p[np.ix_(rest, rest)]
        h[rest, j] = np.linalg.solve(sub, np.ones(n - 1))
    return HittingTimes(h)


def _square(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return a


def sieve_form_matrix(a, ordered: bool = True) -> np.ndarray:
    """Matrix ``L`` with ``x^T L x = sum_{k != l} a_kl (x_k - x_l)^2``.

    With ``ordered=False`` the sum runs over unordered pairs, which for a
    symmetric ``a`` is half the ordered form.
    """
    a = _square(a)
    w = a + a.T
    np.fill_diagonal(w, 0.0)
    lap = np.diag(w.sum(axis=1)) - w
    return lap if ordered else 0.5 * lap


def sieve_constant(a, ordered: bool = True) -> SieveResult:
    """Minimum over nodes ``m`` of the smallest eigenvalue of ``e_m e_m^T + L``."""
    a = _square(a)
    lap = sieve_form_matrix(a, ordered)
    best, arg = np.inf, -1
    for m in range(a.shape[0]):
        q = lap.copy()
        q[m, m] += 1.0
        val = np.linalg.eigvalsh(q)[0]
        if val < best:
            best, arg = val, m
    try:
        lb = sieve_lower_bound(a)
    except GraphError:
        lb = None
    return SieveResult(max(float(best), 0.0), arg, lb, ordered)


def matrix_graph(a) -> list[tuple[int, int]]:
    """Undirected edges ``(k, l)``, ``k < l``, where ``a_kl > 0`` or ``a_lk > 0``."""
    a = _square(a)
    pos = (a > 0) | (a.T > 0)
    k, l = np.nonzero(np.triu(pos, 1))
    return list(zip(k.tolist(), l.tolist()))


def sieve_lower_bound(a) -> float:
    """``eta / (n D)`` with ``eta`` the smallest positive off-diagonal entry."""
    a = _square(a)
    n = a.shape[0]
    edges = matrix_graph(a)
    g = GraphSnapshot(n, tuple(edges))
    if n == 1:
        return 1.0
    d = diameter(g)
    off = a[~np.eye(n, dtype=bool)]
    eta = min(float(off[off > 0].min()), 1.0)
    return eta / (n * d)


def lambda_max(a) -> float:
    a = _square(a)
    if not np.allclose(a, a.T, rtol=0.0, atol=1e-12):
        raise ValueError("lambda_max needs a symmetric matrix")
    return float(np.linalg.eigvalsh(a)[-1])


def norm_decrease_identity(a, x) -> tuple[float, float]:
    """Both sides of ``|x|^2 - |Ax|^2 = sum_j (1-r_j) x_j^2 + sum_{k<l} [A^2]_kl (x_k-x_l)^2``.

    ``r_j`` are the row sums of ``A^2``.
    """
    a = _square(a)
    x = np.asarray(x, dtype=float)
    if x.shape != (a.shape[0],):
        raise ValueError(f"vector of shape {x.shape} does not match matrix {a.shape}")
    if not np.allclose(a, a.T, rtol=0.0, atol=1e-12):
        raise ValueError("the identity needs a symmetric matrix")
    ax = a @ x
    lhs = float(x @ x - ax @ ax)
    a2 = a @ a
    r = a2.sum(axis=1)
    diff = (x[:, None] - x[None, :]) ** 2
    rhs = float(((1.0 - r) * x**2).sum() + np.triu(a2 * diff, 1).sum())
    return lhs, rhs


def _bfs(g: GraphSnapshot, source: int) -> list[int]:
    dist = [-1] * g.n
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for w in g.neighbors[u]:
            if dist[w] < 0:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


def diameter(g: GraphSnapshot) -> int:
    best = 0
    for s in range(g.n):
        dist = _bfs(g, s)
        if min(dist) < 0:
            raise GraphError("diameter is undefined on a disconnected graph")
        best = max(best, max(dist))
    return best
