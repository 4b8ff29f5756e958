"""Closed-form convergence bounds and the decay-recursion machinery behind them.

The decay recursion is

    a(t_{k+1}) = (1 - q / t_{k+1}^(1-eps)) a(t_k) + d / t_k^(2-2 eps),   t_1 = 1,

and the helpers here evaluate it exactly, together with the products
``Phi_q(a, b)`` and the thresholds after which the closed-form bounds hold.
Thresholds are computed in log space; anything above ``1e300`` is returned
as ``inf`` (the ``log_*`` variants stay finite).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "BoundParams",
    "BoundWarning",
    "phi",
    "alpha",
    "decay_threshold",
    "decay_recursion",
    "decay_bound",
    "decay_bound_unit_gaps",
    "log_transient_connected",
    "transient_connected",
    "connected_bound",
    "log_transient_general",
    "transient_general",
    "general_bound",
]

_OVERFLOW_LOG = math.log(1e300)
_CHUNK = 1 << 20


class BoundWarning(UserWarning):
    """A bound was evaluated before its transient threshold."""


@dataclass(frozen=True)
class BoundParams:
    """Inputs of the expected-variance bounds.

    ``H`` is the largest lazy-Metropolis hitting time (connected case),
    ``d_max`` the largest degree in the sequence (B-connected case) and
    ``Z1`` the initial variance.
    """

    n: int
    l: int = 1
    T: int = 1
    B: int = 1
    M: int = 1
    sigma: float = 1.0
    sigma_prime: float = 0.0
    epsilon: float = 0.5
    H: float | None = None
    d_max: int | None = None
    Z1: float = 0.0

    def __post_init__(self):
        for name in ("n", "l", "T", "B", "M"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be a positive integer")
        if self.M > self.n:
            raise ValueError("M cannot exceed n")
        if self.sigma < 0 or self.sigma_prime < 0 or self.Z1 < 0:
            raise ValueError("sigma, sigma_prime and Z1 must be nonnegative")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.H is not None and self.H <= 0:
            raise ValueError("H must be positive")
        if self.d_max is not None and not 1 <= self.d_max <= max(self.n - 1, 1):
            raise ValueError("d_max must lie in [1, n-1]")


def _finite(log_value: float) -> float:
    return math.inf if log_value > _OVERFLOW_LOG else math.exp(log_value)


def phi(q: float, a: int, b: int, eps: float) -> float:
    """``prod_{t=a}^{b-1} (1 - q / t^(1-eps))``, equal to 1 when ``a == b``."""
    if not 2 <= a <= b:
        raise ValueError(f"need 2 <= a <= b, got a={a}, b={b}")
    log_total = 0.0
    for start in range(a, b, _CHUNK):
        t = np.arange(start, min(start + _CHUNK, b), dtype=float)
        x = q / t ** (1.0 - eps)
        if np.any(x > 1.0):
            bad = int(t[np.argmax(x > 1.0)])
            raise ValueError(f"factor 1 - q/t^(1-eps) is negative at t={bad}")
        if np.any(x == 1.0):
            return 0.0
        log_total += float(np.log1p(-x).sum())
    return math.exp(log_total)


def alpha(q: float, eps: float) -> float:
    """``[12/(q eps) ln(4/(q eps))]^(1/eps)``."""
    c = q * eps
    return _finite(math.log(12.0 / c * math.log(4.0 / c)) / eps)


def decay_threshold(q: float, eps: float, T: int, variant: str = "proof") -> float:
    """Index after which :func:`decay_bound` holds.

    ``variant="statement"`` uses constants 12 and 4, ``"proof"`` uses 18
    and 6 (the larger of the two).
    """
    outer, inner = {"statement": (12.0, 4.0), "proof": (18.0, 6.0)}[variant]
    c = q * eps
    return _finite(math.log(outer * T / c * math.log(inner * T / c)) / eps)


def decay_recursion(a1: float, q: float, d: float, eps: float, times: Sequence[int], T: int | None = None) -> np.ndarray:
    """Iterate the decay recursion with equality along ``times`` (``times[0] == 1``)."""
    t = np.asarray(times, dtype=np.int64)
    if t.ndim != 1 or t.size == 0 or t[0] != 1:
        raise ValueError("times must be a nonempty increasing sequence starting at 1")
    gaps = np.diff(t)
    if np.any(gaps <= 0):
        raise ValueError("times must be strictly increasing")
    if T is not None and np.any(gaps > T):
        raise ValueError(f"a gap exceeds T={T}")
    tf = t.astype(float)
    factor = 1.0 - q / tf[1:] ** (1.0 - eps)
    if np.any(factor < 0):
        raise ValueError("a contraction factor is negative")
    drive = d / tf[:-1] ** (2.0 - 2.0 * eps)
    out = np.empty(t.size)
    out[0] = a = float(a1)
    for k, (f, g) in enumerate(zip(factor.tolist(), drive.tolist()), 1):
        a = f * a + g
        out[k] = a
    return out


def decay_bound(k, a1: float, q: float, d: float, eps: float, T: int):
    """``9dT / (q k^(1-eps)) + a1 exp(-q (k^eps - 1) / (T eps))``."""
    k = np.asarray(k, dtype=float)
    if np.any(k < 1):
        raise ValueError("k must be >= 1")
    out = 9.0 * d * T / (q * k ** (1.0 - eps)) + a1 * np.exp(-q * (k**eps - 1.0) / (T * eps))
    return float(out) if out.ndim == 0 else out


def decay_bound_unit_gaps(k, a1: float, q: float, d: float, eps: float):
    """Bound for ``t_k = k``: ``9d/q ln(k)/k^(1-eps) + a1 exp(-q (k^eps - 2)/eps)``."""
    k = np.asarray(k, dtype=float)
    out = 9.0 * d / q * np.log(k) / k ** (1.0 - eps) + a1 * np.exp(-q * (k**eps - 2.0) / eps)
    return float(out) if out.ndim == 0 else out


def _require(p: BoundParams, field: str):
    if getattr(p, field) is None:
        raise ValueError(f"BoundParams.{field} is required for this bound")
    return getattr(p, field)


def log_transient_connected(p: BoundParams) -> float:
    h = _require(p, "H")
    c = p.T * h / p.epsilon
    return math.log(2.0 * p.T) + math.log(288.0 * c * math.log(96.0 * c)) / p.epsilon


def transient_connected(p: BoundParams) -> float:
    """``2T [288 T H / eps ln(96 T H / eps)]^(1/eps)``."""
    return _finite(log_transient_connected(p))


def connected_bound(t: float, p: BoundParams, warn: bool = True) -> float:
    """Bound on ``E[Z(t) | v(1)]`` when every graph is connected."""
    h = _require(p, "H")
    s = t / p.T - 1.0
    if s <= 0:
        raise ValueError(f"need t > T, got t={t}, T={p.T}")
    if warn and t < transient_connected(p):
        warnings.warn(f"t={t} is below the transient threshold", BoundWarning, stacklevel=2)
    eps = p.epsilon
    noise = 15.0 * h * p.T * p.l * (p.M * p.sigma**2 + p.n * p.T * p.sigma_prime**2) / s ** (1.0 - eps)
    initial = p.Z1 * math.exp(-(s**eps - 2.0) / (24.0 * h * p.T * eps)) if p.Z1 else 0.0
    return noise + initial


def log_transient_general(p: BoundParams) -> float:
    d = _require(p, "d_max")
    x = max(p.T, p.B)
    c = p.n**2 * d * (1.0 + x) / p.epsilon
    return math.log(2.0 * x) + math.log(384.0 * c * math.log(128.0 * c)) / p.epsilon


def transient_general(p: BoundParams) -> float:
    """``2X [384 n^2 d_max (1+X)/eps ln(128 n^2 d_max (1+X)/eps)]^(1/eps)``, ``X = max(T, B)``."""
    return _finite(log_transient_general(p))


def general_bound(t: float, p: BoundParams, warn: bool = True) -> float:
    """Bound on ``E[Z(t) | v(1)]`` for a B-connected sequence."""
    d = _require(p, "d_max")
    x = max(p.T, p.B)
    if t <= 0:
        raise ValueError("t must be positive")
    if warn and t < transient_general(p):
        warnings.warn(f"t={t} is below the transient threshold", BoundWarning, stacklevel=2)
    eps = p.epsilon
    s = t / x
    scale = p.n**2 * d
    noise = 2.0 * scale * x * p.l * (p.M * p.sigma**2 + 2.0 * p.n * (1.0 + x) * p.sigma_prime**2) / s ** (1.0 - eps)
    initial = p.Z1 * math.exp(-(s**eps - 2.0) / (32.0 * scale * (1.0 + x) * eps)) if p.Z1 else 0.0
    return noise + initial
