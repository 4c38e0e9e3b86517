"""Empirical and exact statistics for the catalyst dynamics.

Two-point space-time correlations with their closed forms, the centered
site-integral fluctuation functionals (first, second and fourth moments),
the Poisson large-deviation rate, and the jump-count tail check. Exact
formulas use the torus walk kernel throughout; the walk rate is 1 (the
particle jump rate of every dynamics here), i.e. per-axis edge rate 1/(2d).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np
import scipy.integrate

from ._parallel import parallel_map
from .environment import EnvKind, env_evolve, env_init, env_integral
from .lattice import heat_kernel_origin_values
from .rng import RngStream

__all__ = [
    "Estimate",
    "CorrelationCheck",
    "LdpCheck",
    "correlation_exact",
    "correlation_empirical",
    "correlation_empirical_many",
    "noisiness_e1",
    "noisiness_e2_e4",
    "noisiness_e2_oracle",
    "poisson_rate",
    "ldp_empirical_check",
]


@dataclass
class Estimate:
    """Replica-mean statistic with its standard error."""

    mean: float
    std_error: float
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not (self.std_error >= 0.0 or math.isnan(self.std_error)):
            raise ValueError("std_error must be >= 0")


@dataclass
class CorrelationCheck:
    kind: EnvKind
    x: int
    t: float
    empirical: Estimate
    exact: float

    @property
    def z_score(self):
        se = self.empirical.std_error
        return (self.empirical.mean - self.exact) / se if se > 0 else math.inf


def _estimate(samples):
    samples = np.asarray(samples, dtype=np.float64)
    n = len(samples)
    se = samples.std(ddof=1) / math.sqrt(n) if n > 1 else math.nan
    return Estimate(float(samples.mean()), float(se), n)


def _walk_rate_kappa(d):
    # Total jump rate 1 for the catalyst particles: 2 d kappa = 1.
    return 1.0 / (2.0 * d)


def _kernel_value_at(torus, t, x):
    """p_t(x) for the rate-1 walk, spectral product across axes."""
    L, d = torus.L, torus.d
    coords = torus.site_coords(x)
    k = np.arange(L)
    lam = 2.0 * _walk_rate_kappa(d) * (np.cos(2.0 * np.pi * k / L) - 1.0)
    ek = np.exp(lam * t)
    val = 1.0
    for axis in range(d):
        c = int(coords[axis])
        val *= float((ek * np.cos(2.0 * np.pi * k * c / L)).mean())
    return val


def _kernel_time_integral_at(torus, t_lo, t_hi, x):
    """Integral of p_s(x) ds over [t_lo, t_hi], rate-1 walk, closed form."""
    L, d = torus.L, torus.d
    coords = np.asarray(torus.site_coords(x), dtype=np.int64)
    k = np.arange(L)
    lam_axis = 2.0 * _walk_rate_kappa(d) * (np.cos(2.0 * np.pi * k / L) - 1.0)
    lam = reduce(np.add.outer, [lam_axis] * d).ravel()
    phase_axis = [np.cos(2.0 * np.pi * k * int(coords[a]) / L) for a in range(d)]
    phase = reduce(np.multiply.outer, phase_axis).ravel()
    out = 0.0
    zero = lam > -1e-15
    out += (phase[zero]).sum() * (t_hi - t_lo)
    nz = ~zero
    out += (
        phase[nz] * (np.exp(lam[nz] * t_hi) - np.exp(lam[nz] * t_lo)) / lam[nz]
    ).sum()
    return float(out) / L**d


def correlation_exact(kind, x, t, rho, torus, green_value=None, t_cut=None):
    """Closed-form two-point correlation E[(xi(0,0)-rho)(xi(x,t)-rho)].

    ISRW: rho * p_t(x); SEP: rho(1-rho) * p_t(x) (both exact on the torus by
    one-particle duality from the product start). SVM (d >= 3 only):
    rho(1-rho)/G * integral of p_{t+u}(x) du truncated at t_cut, carrying the
    Green-function truncation caveat; indicative, not acceptance-gated.
    """
    if kind == EnvKind.ISRW:
        return rho * _kernel_value_at(torus, t, x)
    if kind == EnvKind.SEP:
        return rho * (1.0 - rho) * _kernel_value_at(torus, t, x)
    if kind == EnvKind.SVM:
        if torus.d < 3:
            raise ValueError("SVM exact correlation requires d >= 3")
        if green_value is None or not green_value > 0:
            raise ValueError("SVM exact correlation needs green_value > 0")
        if t_cut is None:
            raise ValueError("SVM exact correlation needs a t_cut")
        integral = _kernel_time_integral_at(torus, t, t + t_cut, x)
        return rho * (1.0 - rho) / green_value * integral
    raise ValueError(f"no exact correlation for kind {kind!r}")


def _corr_worker(args):
    kind, torus, rho, cells, t_max, stream = args
    state = env_init(kind, torus, rho, stream.child(0))
    traj = env_evolve(kind, state, t_max, stream.child(1))
    v0 = float(traj.query(0, 0.0)) - rho
    sites = np.asarray([c[0] for c in cells], dtype=np.int64)
    ts = np.asarray([c[1] for c in cells], dtype=np.float64)
    return v0 * (traj.values_many(sites, ts) - rho)


def correlation_empirical_many(kind, cells, rho, torus, n_env, seed, *,
                               workers=1):
    """Replica correlation estimates for several (site, t) cells at once.

    Each replica environment serves every cell, so cross-cell comparisons
    share noise; returns {(site, t): Estimate}.
    """
    cells = [(int(x), float(t)) for (x, t) in cells]
    t_max = max(t for _, t in cells)
    stream = seed if isinstance(seed, RngStream) else RngStream(int(seed))
    tasks = [
        (kind, torus, rho, cells, t_max, stream.child(i))
        for i in range(n_env)
    ]
    rows = np.asarray(parallel_map(_corr_worker, tasks, workers=workers))
    return {
        cell: _estimate(rows[:, j]) for j, cell in enumerate(cells)
    }


def correlation_empirical(kind, x, t, rho, torus, n_env, seed, *, workers=1):
    """Replica average of [xi(0,0)-rho][xi(x,t)-rho] from stationary starts."""
    if n_env < 1000:
        raise ValueError(f"n_env must be >= 1000, got {n_env}")
    got = correlation_empirical_many(
        kind, [(x, t)], rho, torus, n_env, seed, workers=workers
    )
    return got[(int(x), float(t))]


# ---------------------------------------------------------------------------
# Centered site-integral fluctuation functionals
# ---------------------------------------------------------------------------


def _noisiness_worker(args):
    kind, torus, rho, T, stream = args
    state = env_init(kind, torus, rho, stream.child(0))
    traj = env_evolve(kind, state, T, stream.child(1))
    i0 = env_integral(traj, 0, T, rho)
    ie = env_integral(traj, torus.unit_neighbor, T, rho)
    return i0, ie


def _noisiness_samples(kind, rho, torus, T, n_env, seed, workers):
    stream = seed if isinstance(seed, RngStream) else RngStream(int(seed))
    tasks = [
        (kind, torus, rho, float(T), stream.child(i)) for i in range(n_env)
    ]
    rows = np.asarray(parallel_map(_noisiness_worker, tasks, workers=workers))
    return rows[:, 0], rows[:, 1]


def noisiness_e1(kind, rho, torus, T, n_env, seed, *, workers=1):
    """Mean absolute gap between the centered occupation integrals at the
    origin and at its neighbor, E|I(0,T) - I(e,T)|."""
    if not T > 0:
        raise ValueError(f"T must be > 0, got {T}")
    i0, ie = _noisiness_samples(kind, rho, torus, T, n_env, seed, workers)
    return _estimate(np.abs(i0 - ie))


def noisiness_e2_e4(kind, rho, torus, T, n_env, seed, *, workers=1):
    """Second moment of the neighbor gap and fourth moment of the origin
    integral: (E|I(0,T)-I(e,T)|^2, E|I(0,T)|^4), one replica set for both."""
    if not T > 0:
        raise ValueError(f"T must be > 0, got {T}")
    i0, ie = _noisiness_samples(kind, rho, torus, T, n_env, seed, workers)
    return _estimate((i0 - ie) ** 2), _estimate(i0**4)


def noisiness_e2_oracle(kind, rho, torus, T):
    """Quadrature value of the finite-T second moment of the neighbor gap:
    4 * prefactor * integral over [0,T] of (T-t) [p_t(0) - p_t(e)] dt,
    with prefactor rho (ISRW) or rho(1-rho) (SEP)."""
    if kind == EnvKind.ISRW:
        pref = rho
    elif kind == EnvKind.SEP:
        pref = rho * (1.0 - rho)
    else:
        raise ValueError(f"no second-moment oracle for kind {kind!r}")
    kap = _walk_rate_kappa(torus.d)

    def integrand(t):
        p0, pe = heat_kernel_origin_values(torus, kap, [t])
        return (T - t) * (p0[0] - pe[0])

    val, _err = scipy.integrate.quad(integrand, 0.0, T, limit=200)
    return 4.0 * pref * val


# ---------------------------------------------------------------------------
# Poisson large deviations for the walk jump count
# ---------------------------------------------------------------------------


def poisson_rate(M):
    """Legendre transform sup_u [M u - (e^u - 1)] = M log M - M + 1."""
    if not M > 0:
        raise ValueError(f"M must be > 0, got {M}")
    return M * math.log(M) - M + 1.0


@dataclass
class LdpCheck:
    """Empirical vs asymptotic tail rate for the walk jump count."""

    empirical_rate: float
    exact_rate: float
    hits: int
    n_samples: int
    threshold: float
    degenerate: bool


def ldp_empirical_check(kappa, t, M, n_samples, seed, *, d=1):
    """Estimate -(1/t) log P(J > M * 2dκt) for the jump count J of a
    rate-2dκ walk over [0, t], next to the asymptotic rate 2dκ * I(M).

    J is Poisson(2dκt) exactly (that is the jump-count marginal of
    rw_sample_path), so counts are sampled directly from that law. A
    zero-hit tail is flagged as degenerate rather than reported as a rate.
    """
    if not M > 1:
        raise ValueError(f"M must be > 1, got {M}")
    mean = 2.0 * d * kappa * t
    threshold = M * mean
    stream = seed if isinstance(seed, RngStream) else RngStream(int(seed))
    gen = stream.generator
    hits = 0
    remaining = int(n_samples)
    while remaining > 0:
        block = min(remaining, 10**7)
        hits += int((gen.poisson(mean, size=block) > threshold).sum())
        remaining -= block
    exact = 2.0 * d * kappa * poisson_rate(M)
    if hits == 0:
        return LdpCheck(math.inf, exact, 0, int(n_samples), threshold, True)
    empirical = -math.log(hits / n_samples) / t
    return LdpCheck(empirical, exact, hits, int(n_samples), threshold, False)
