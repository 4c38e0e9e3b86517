"""Inner loops for event application and ODE stepping.

Numba-jitted when numba imports cleanly; otherwise the pure-numpy twins are
used. Both paths implement identical arithmetic sequences per element, but
floating summation order differs between them, so bit-level reproducibility
holds per installed backend (the determinism contract is same-machine,
same-install).
"""

from __future__ import annotations

import math

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except Exception:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def deco(f):
            return f

        return deco


# Renormalization window for the scaled solver field.
RENORM_HI = 2.0**64
RENORM_LO = 2.0**-64


# ---------------------------------------------------------------------------
# Event application: turn raw event streams into per-site value changes.
# Each returns (event_index, site, new_value) triples for the events that
# actually changed a site, and leaves `occ` holding the final configuration.
# ---------------------------------------------------------------------------


@njit(cache=True)
def _sep_changes_nb(edge_u, edge_v, occ):
    m = edge_u.shape[0]
    evt = np.empty(2 * m, dtype=np.int64)
    site = np.empty(2 * m, dtype=np.int64)
    val = np.empty(2 * m, dtype=np.int64)
    k = 0
    for i in range(m):
        a = edge_u[i]
        b = edge_v[i]
        if occ[a] != occ[b]:
            tmp = occ[a]
            occ[a] = occ[b]
            occ[b] = tmp
            evt[k] = i
            site[k] = a
            val[k] = occ[a]
            k += 1
            evt[k] = i
            site[k] = b
            val[k] = occ[b]
            k += 1
    return evt[:k], site[:k], val[:k]


def _sep_changes_py(edge_u, edge_v, occ):
    evt, site, val = [], [], []
    for i in range(edge_u.shape[0]):
        a = int(edge_u[i])
        b = int(edge_v[i])
        if occ[a] != occ[b]:
            occ[a], occ[b] = occ[b], occ[a]
            evt += [i, i]
            site += [a, b]
            val += [int(occ[a]), int(occ[b])]
    return (
        np.asarray(evt, dtype=np.int64),
        np.asarray(site, dtype=np.int64),
        np.asarray(val, dtype=np.int64),
    )


@njit(cache=True)
def _svm_changes_nb(site_ids, nbr_ids, occ):
    m = site_ids.shape[0]
    evt = np.empty(m, dtype=np.int64)
    site = np.empty(m, dtype=np.int64)
    val = np.empty(m, dtype=np.int64)
    k = 0
    for i in range(m):
        x = site_ids[i]
        y = nbr_ids[i]
        if occ[x] != occ[y]:
            occ[x] = occ[y]
            evt[k] = i
            site[k] = x
            val[k] = occ[x]
            k += 1
    return evt[:k], site[:k], val[:k]


def _svm_changes_py(site_ids, nbr_ids, occ):
    evt, site, val = [], [], []
    for i in range(site_ids.shape[0]):
        x = int(site_ids[i])
        y = int(nbr_ids[i])
        if occ[x] != occ[y]:
            occ[x] = occ[y]
            evt.append(i)
            site.append(x)
            val.append(int(occ[x]))
    return (
        np.asarray(evt, dtype=np.int64),
        np.asarray(site, dtype=np.int64),
        np.asarray(val, dtype=np.int64),
    )


# ---------------------------------------------------------------------------
# RK4 stepping of u' = kappa*Lap(u) + gamma*xi*u over one interval of
# constant xi, with max-norm renormalization into (log_norm) on overflow or
# underflow. Tiny truncation negatives are clamped to zero; the clamped mass
# is far below the scheme's truncation error at the enforced step caps.
# ---------------------------------------------------------------------------


@njit(cache=True)
def _generator_apply_nb(src, out, xi, nbr, kappa, gamma):
    n = src.shape[0]
    deg = nbr.shape[1]
    for x in range(n):
        s = 0.0
        for j in range(deg):
            s += src[nbr[x, j]]
        out[x] = kappa * (s - deg * src[x]) + gamma * xi[x] * src[x]


@njit(cache=True)
def _rk4_interval_nb(u, xi, nbr, kappa, gamma, dt, h_cap, log_norm):
    n = u.shape[0]
    n_sub = int(math.ceil(dt / h_cap))
    if n_sub < 1:
        n_sub = 1
    h = dt / n_sub
    k1 = np.empty(n)
    k2 = np.empty(n)
    k3 = np.empty(n)
    k4 = np.empty(n)
    tmp = np.empty(n)
    for _ in range(n_sub):
        _generator_apply_nb(u, k1, xi, nbr, kappa, gamma)
        for x in range(n):
            tmp[x] = u[x] + 0.5 * h * k1[x]
        _generator_apply_nb(tmp, k2, xi, nbr, kappa, gamma)
        for x in range(n):
            tmp[x] = u[x] + 0.5 * h * k2[x]
        _generator_apply_nb(tmp, k3, xi, nbr, kappa, gamma)
        for x in range(n):
            tmp[x] = u[x] + h * k3[x]
        _generator_apply_nb(tmp, k4, xi, nbr, kappa, gamma)
        mx = 0.0
        for x in range(n):
            v = u[x] + (h / 6.0) * (k1[x] + 2.0 * k2[x] + 2.0 * k3[x] + k4[x])
            if v < 0.0:
                v = 0.0
            u[x] = v
            if v > mx:
                mx = v
        if not np.isfinite(mx) or mx <= 0.0:
            return log_norm, n_sub, False
        if mx > RENORM_HI or mx < RENORM_LO:
            inv = 1.0 / mx
            for x in range(n):
                u[x] *= inv
            log_norm += math.log(mx)
    return log_norm, n_sub, True


def _rk4_interval_py(u, xi, nbr, kappa, gamma, dt, h_cap, log_norm):
    deg = nbr.shape[1]
    n_sub = max(1, int(math.ceil(dt / h_cap)))
    h = dt / n_sub

    def gen(v):
        return kappa * (v[nbr].sum(axis=1) - deg * v) + gamma * xi * v

    for _ in range(n_sub):
        k1 = gen(u)
        k2 = gen(u + (0.5 * h) * k1)
        k3 = gen(u + (0.5 * h) * k2)
        k4 = gen(u + h * k3)
        u += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        np.maximum(u, 0.0, out=u)
        mx = u.max()
        if not np.isfinite(mx) or mx <= 0.0:
            return log_norm, n_sub, False
        if mx > RENORM_HI or mx < RENORM_LO:
            u /= mx
            log_norm += math.log(mx)
    return log_norm, n_sub, True


if HAVE_NUMBA:
    sep_changes = _sep_changes_nb
    svm_changes = _svm_changes_nb
    rk4_interval = _rk4_interval_nb
else:  # pragma: no cover
    sep_changes = _sep_changes_py
    svm_changes = _svm_changes_py
    rk4_interval = _rk4_interval_py
