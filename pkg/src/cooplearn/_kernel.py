"""Compiled inner loop of the batched simulator.

Columns of ``V`` are trial-major (``k * l + c``). Snapshots are passed as
concatenated CSR edge lists; offset noise enters through a list of
``(row, draw, coef)`` triples per snapshot.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _errors(V, mu_cols, K, l, z, e):
    n = V.shape[0]
    for k in range(K):
        zs = 0.0
        es = 0.0
        for c in range(k * l, (k + 1) * l):
            m = mu_cols[c]
            for i in range(n):
                d = V[i, c] - m
                zs += d * d
                if abs(d) > es:
                    es = abs(d)
        z[k] = zs
        e[k] = es


@njit(cache=True)
def advance(
    V, mu_cols, K, l,
    gid, deltas,
    csr_ptr, csr_base, csr_col, csr_w,
    off_ptr, off_row, off_draw, off_coef,
    meas_ptr, meas_node,
    draw_start, n_off, n_meas, block,
    sigma, sigma_prime,
    t0, horizon, stride, threshold, early_exit, conv,
    rec_t, rec_z, rec_e,
):
    """Run ``len(gid)`` steps in place; returns ``(steps_taken, records, done)``.

    ``threshold < 0`` disables convergence tracking. ``conv[k] < 0`` marks a
    trial that has not converged yet.
    """
    n, C = V.shape
    U = np.empty((n, C))
    z = np.empty(K)
    e = np.empty(K)
    count = gid.shape[0]
    nrec = 0
    t = t0
    done = False
    for s in range(count):
        g = gid[s]
        delta = deltas[s]
        base = csr_base[g]
        for r in range(n):
            for c in range(C):
                U[r, c] = 0.0
            for p in range(csr_ptr[g * (n + 1) + r], csr_ptr[g * (n + 1) + r + 1]):
                j = csr_col[base + p]
                w = csr_w[base + p]
                for c in range(C):
                    U[r, c] += w * (V[j, c] - V[r, c])
        start = draw_start[s]
        if n_off[s] > 0:
            for q in range(off_ptr[g], off_ptr[g + 1]):
                r = off_row[q]
                pos = start + off_draw[q] * l
                coef = sigma_prime * off_coef[q]
                for k in range(K):
                    for c in range(l):
                        U[r, k * l + c] += coef * block[k, pos + c]
        mstart = start + n_off[s]
        for idx in range(meas_ptr[s], meas_ptr[s + 1]):
            i = meas_node[idx]
            slot = idx - meas_ptr[s]
            for k in range(K):
                for c in range(l):
                    col = k * l + c
                    pull = mu_cols[col] - V[i, col]
                    if n_meas[s] > 0:
                        pull += sigma * block[k, mstart + slot * l + c]
                    U[i, col] += 0.25 * pull
        for r in range(n):
            for c in range(C):
                V[r, c] += delta * U[r, c]
        t += 1

        record = (t - 1) % stride == 0 or t == horizon
        if threshold >= 0.0 or record:
            _errors(V, mu_cols, K, l, z, e)
            for k in range(K):
                if not np.isfinite(z[k]):
                    return s + 1, nrec, done
            if threshold >= 0.0:
                remaining = 0
                for k in range(K):
                    if conv[k] < 0 and e[k] < threshold:
                        conv[k] = t
                    if conv[k] < 0:
                        remaining += 1
                if early_exit and remaining == 0:
                    done = True
            if record or done:
                rec_t[nrec] = t
                for k in range(K):
                    rec_z[nrec, k] = z[k]
                    rec_e[nrec, k] = e[k]
                nrec += 1
            if done:
                return s + 1, nrec, done
    return count, nrec, done
