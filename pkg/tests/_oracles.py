"""Independent reference computations used only by the tests.

These deliberately avoid the package's own code paths: dense matrix
exponentials for kernels and piecewise-constant generators, Bessel-function
free-lattice return probabilities, quadrature, and hand-rolled replays.
"""

import numpy as np
import scipy.integrate
import scipy.linalg
import scipy.special


def walk_generator(torus, kappa):
    """Dense generator of the rate-2dκ walk (column-stochastic convention)."""
    n = torus.sites
    nbr = torus.neighbor_table()
    gen = np.zeros((n, n))
    for x in range(n):
        for y in nbr[x]:
            gen[y, x] += kappa
        gen[x, x] -= 2 * torus.d * kappa
    return gen


def kernel_by_expm(torus, kappa, t):
    """Heat kernel column via scipy's scaling-and-squaring expm."""
    return scipy.linalg.expm(walk_generator(torus, kappa) * t)[:, 0]


def free_lattice_return_integral(d, t_cut):
    """Integral over [0, t_cut] of the rate-1 walk return probability on the
    infinite lattice: per-axis factor exp(-t/d) I0(t/d), via quadrature."""

    def p0(t):
        return scipy.special.ive(0, t / d) ** d

    val, _ = scipy.integrate.quad(p0, 0.0, t_cut, limit=400)
    return val


def solve_piecewise_expm(traj, params, t_end, u0_vector):
    """Direct-solve oracle: exact matrix exponentials between events."""
    torus = traj.torus
    gen0 = walk_generator(torus, params.kappa)
    g_times, g_offsets, g_sites, g_vals = traj.field_change_groups()
    xi = traj.state_at(0.0)
    u = np.asarray(u0_vector, dtype=np.float64).copy()
    cur = 0.0
    boundaries = [
        (float(t), k) for k, t in enumerate(g_times) if t <= t_end
    ] + [(float(t_end), -1)]
    for b_time, k in boundaries:
        dt = b_time - cur
        if dt > 0:
            mat = gen0 + np.diag(params.gamma * xi)
            u = scipy.linalg.expm(mat * dt) @ u
        if k >= 0:
            xi = xi.copy()
            s = slice(g_offsets[k], g_offsets[k + 1])
            xi[g_sites[s]] = g_vals[s]
        cur = b_time
    return u


def replay_final_occupation(traj):
    """Reconstruct the final configuration from (initial, events) alone."""
    from pamlab import EnvKind

    occ = traj.initial.occupation.copy()
    torus = traj.torus
    if traj.kind == EnvKind.CONSTANT:
        return occ
    if traj.kind == EnvKind.ISRW:
        positions = list(np.repeat(np.arange(torus.sites), occ))
        coords = [list(torus.site_coords(p)) for p in positions]
        for pid, direction in zip(traj.payload_a, traj.payload_b):
            axis, sign = direction >> 1, (-1 if direction & 1 else 1)
            coords[pid][axis] = (coords[pid][axis] + sign) % torus.L
        occ = np.zeros(torus.sites, dtype=np.int64)
        for c in coords:
            occ[int(torus.site_index(np.array(c)))] += 1
        return occ
    if traj.kind == EnvKind.SEP:
        edges = torus.edge_table()
        for eid in traj.payload_a:
            a, b = edges[eid]
            occ[a], occ[b] = occ[b], occ[a]
        return occ
    nbr = torus.neighbor_table()
    for sid, direction in zip(traj.payload_a, traj.payload_b):
        occ[sid] = occ[nbr[sid, direction]]
    return occ


def poisson_tail_rate(mean, threshold, t):
    """Exact -(1/t) log P(Poisson(mean) > threshold)."""
    import scipy.stats

    return -np.log(scipy.stats.poisson.sf(threshold, mean)) / t
