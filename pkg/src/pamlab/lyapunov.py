"""Growth-rate estimation: quenched and annealed exponents, kappa sweeps.

Finite-time estimates are reported at the largest simulated time with the
whole time grid attached; no asymptote is fitted. Sweeps reuse the same
environment realizations at every kappa (common random numbers), which
stabilizes the shape of the curve at desk scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from ._parallel import parallel_map
from .environment import env_evolve, env_init
from .rng import RngStream
from .solver import InitialCondition, SolverError, solve_direct

__all__ = [
    "LyapunovEstimate",
    "SweepResult",
    "quenched_lambda",
    "annealed_lambda",
    "kappa_sweep",
    "HEAVY_TAIL_SHARE",
]

# One replica carrying more than this share of the empirical moment marks
# the annealed estimate as untrustworthy (expected when moments diverge).
HEAVY_TAIL_SHARE = 0.5

DEFAULT_CHECKPOINT_FRACTIONS = (0.125, 0.25, 0.5, 1.0)


@dataclass
class LyapunovEstimate:
    """Finite-time growth-rate estimate at the largest simulated time.

    p == 0 is the quenched (per-environment) exponent; p >= 1 the annealed
    moment exponent. `t_grid` holds (t, estimate) pairs at the checkpoint
    times, `t_std_errors` the matching standard errors.
    """

    p: int
    value: float
    std_error: float
    t_grid: tuple
    replicas: int
    t_std_errors: tuple = ()
    heavy_tail: bool = False
    max_share: float = 0.0
    failures: int = 0


def _as_stream(seed):
    return seed if isinstance(seed, RngStream) else RngStream(int(seed))


def _make_env(kind, torus, rho, t_end, stream):
    state = env_init(kind, torus, rho, stream.child(0))
    return env_evolve(kind, state, t_end, stream.child(1))


def _env_log_u(args):
    """Worker: one environment, direct solve, log u(0, t) at checkpoints."""
    (kind, torus, params, t_end, times, replica_stream) = args
    try:
        traj = _make_env(kind, torus, params.rho, t_end, replica_stream)
        report = solve_direct(
            traj, params, InitialCondition.DELTA, t_end, checkpoints=times
        )
        return [lu for (_, lu) in report.checkpoints]
    except SolverError as exc:
        return str(exc)


def _collect_log_u(kind, params, torus, t_end, n_env, seed, workers,
                  fractions):
    times = [f * t_end for f in fractions]
    stream = _as_stream(seed)
    tasks = [
        (kind, torus, params, float(t_end), times, stream.child(i))
        for i in range(n_env)
    ]
    results = parallel_map(_env_log_u, tasks, workers=workers)
    good = [r for r in results if not isinstance(r, str)]
    failures = len(results) - len(good)
    if failures > n_env / 2:
        bad = next(r for r in results if isinstance(r, str))
        raise SolverError(
            f"{failures}/{n_env} replicas failed; first failure: {bad}"
        )
    return np.asarray(times), np.asarray(good), failures


def quenched_lambda(kind, params, torus, t_end, n_env, seed, *, workers=1,
                    checkpoint_fractions=DEFAULT_CHECKPOINT_FRACTIONS):
    """Cross-environment mean of (1/t) log u(0, t) at t = t_end.

    Each replica runs an independent environment to t_end with the direct
    solver, recording the growth-rate trace at the checkpoint fractions; the
    replica spread at t_end gives the standard error.
    """
    if t_end < 10:
        raise ValueError(f"t_end must be >= 10 (finite-t bias), got {t_end}")
    if n_env < 4:
        raise ValueError(f"n_env must be >= 4, got {n_env}")
    times, log_u, failures = _collect_log_u(
        kind, params, torus, t_end, n_env, seed, workers,
        checkpoint_fractions,
    )
    lam = log_u / times  # (n_good, n_times)
    means = lam.mean(axis=0)
    ses = lam.std(axis=0, ddof=1) / math.sqrt(lam.shape[0])
    return LyapunovEstimate(
        p=0,
        value=float(means[-1]),
        std_error=float(ses[-1]),
        t_grid=tuple(zip(times.tolist(), means.tolist())),
        replicas=lam.shape[0],
        t_std_errors=tuple(ses.tolist()),
        failures=failures,
    )


def _annealed_stat(log_u, times, p):
    """(1/(p t)) log mean(u^p) per checkpoint, via shifted exponentials."""
    plu = p * log_u
    m = plu.max(axis=0)
    mean_scaled = np.exp(plu - m).mean(axis=0)
    return (m + np.log(mean_scaled)) / (p * times)


def annealed_lambda(kind, params, torus, t_end, p, n_env, seed, *, workers=1,
                    checkpoint_fractions=DEFAULT_CHECKPOINT_FRACTIONS,
                    n_bootstrap=200):
    """Annealed moment growth rate (1/(pt)) log mean over environments of
    u(0,t)^p, with bootstrap standard errors and a heavy-tail diagnostic.

    Moment estimation is heavy-tailed; a single replica carrying more than
    HEAVY_TAIL_SHARE of the empirical moment raises the `heavy_tail` flag
    (expected in the strongly catalytic regime, where the true moments
    diverge and no finite-sample number should be trusted as converged).
    """
    # Higher moments are formally divergent in the strongly catalytic
    # regime; finite-sample estimates beyond p=2 would be pure noise.
    if p not in (1, 2):
        raise ValueError(f"moment order capped at p in (1, 2), got {p}")
    if n_env < 100:
        raise ValueError(
            f"n_env must be >= 100 for moment estimation, got {n_env}"
        )
    times, log_u, failures = _collect_log_u(
        kind, params, torus, t_end, n_env, seed, workers,
        checkpoint_fractions,
    )
    n = log_u.shape[0]
    stats = _annealed_stat(log_u, times, p)

    plu_end = p * log_u[:, -1]
    shares = np.exp(plu_end - plu_end.max())
    max_share = float(shares.max() / shares.sum())

    boot_gen = _as_stream(seed).child(10**6).generator
    idx = boot_gen.integers(0, n, size=(n_bootstrap, n))
    boot = np.empty((n_bootstrap, len(times)))
    for b in range(n_bootstrap):
        boot[b] = _annealed_stat(log_u[idx[b]], times, p)
    ses = boot.std(axis=0, ddof=1)

    return LyapunovEstimate(
        p=int(p),
        value=float(stats[-1]),
        std_error=float(ses[-1]),
        t_grid=tuple(zip(times.tolist(), stats.tolist())),
        replicas=n,
        t_std_errors=tuple(ses.tolist()),
        heavy_tail=max_share > HEAVY_TAIL_SHARE,
        max_share=max_share,
        failures=failures,
    )


@dataclass
class SweepResult:
    """Per-kappa estimates at fixed remaining parameters."""

    kappa_grid: tuple
    params_base: object
    estimates: dict          # (kappa, p) -> LyapunovEstimate
    failures: dict           # (kappa, p) -> error message

    def rows(self):
        """CSV rows (kappa, p, t, lambda_hat, std_error, replicas, flag)."""
        out = []
        for kappa in self.kappa_grid:
            for (k, p), est in sorted(
                self.estimates.items(), key=lambda kv: (kv[0][0], kv[0][1])
            ):
                if k != kappa:
                    continue
                ses = est.t_std_errors or (est.std_error,) * len(est.t_grid)
                for (t, lam), se in zip(est.t_grid, ses):
                    out.append((kappa, p, t, lam, se, est.replicas,
                                int(est.heavy_tail)))
        return out


def kappa_sweep(kind, params_base, torus, kappa_grid, t_end, p_list, n_env,
                seed, *, workers=1, n_env_annealed=None):
    """Quenched (and optional annealed) estimates along a kappa grid.

    The same seed stream is replayed at every kappa, so all cells see the
    same environment realizations; per-cell failures are recorded and the
    sweep continues.
    """
    kappa_grid = [float(k) for k in kappa_grid]
    if not kappa_grid:
        raise ValueError("kappa_grid must be nonempty")
    if sorted(kappa_grid) != kappa_grid:
        raise ValueError("kappa_grid must be sorted ascending")
    estimates, failures = {}, {}
    for kappa in kappa_grid:
        params = replace(params_base, kappa=kappa)
        try:
            estimates[(kappa, 0)] = quenched_lambda(
                kind, params, torus, t_end, n_env, seed, workers=workers
            )
        except (SolverError, ValueError) as exc:
            failures[(kappa, 0)] = str(exc)
        for p in p_list:
            try:
                estimates[(kappa, int(p))] = annealed_lambda(
                    kind, params, torus, t_end, int(p),
                    n_env_annealed or n_env, seed, workers=workers,
                )
            except (SolverError, ValueError) as exc:
                failures[(kappa, int(p))] = str(exc)
    return SweepResult(
        kappa_grid=tuple(kappa_grid),
        params_base=params_base,
        estimates=estimates,
        failures=failures,
    )
