"""Event-driven catalyst dynamics behind a single trajectory interface.

Three interacting-particle systems drive the reactant equation:

* ISRW  -- independent rate-1 simple random walks, Poisson(rho) start;
           occupation counts are unbounded.
* SEP   -- symmetric exclusion realized by stirring: every unordered
           nearest-neighbor edge carries a rate-1/(2d) clock and swaps its two
           site contents when it rings, which conserves particles exactly and
           gives each particle total jump rate 1.
* SVM   -- voter dynamics: each site at rate 1 copies the opinion of a
           uniformly chosen neighbor. On a finite torus the only equilibria
           are the consensus states, so runs are capped at t <= L^2/8 and all
           SVM statistics are transient-time statistics.
* CONSTANT -- frozen field xi == c, for tests and closed forms (c is passed
           through the `rho` argument of env_init).

A trajectory is the initial configuration plus the time-ordered event log;
the log's payload is minimal (particle+direction / edge / site+direction).
For queries the trajectory compiles, once, a per-site list of value changes
with running integrals, giving exact O(log) point queries and exact
piecewise-constant integrals with no quadrature error.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .lattice import Torus

__all__ = [
    "EnvKind",
    "EnvState",
    "EnvTrajectory",
    "env_init",
    "env_evolve",
    "env_integral",
    "save_trajectory",
    "load_trajectory",
]

# Consensus-time guard for voter runs (see module docstring).
SVM_TIME_CAP_FACTOR = 1.0 / 8.0


class EnvKind(enum.Enum):
    ISRW = "ISRW"
    SEP = "SEP"
    SVM = "SVM"
    CONSTANT = "CONSTANT"


@dataclass
class EnvState:
    """Occupation numbers per site (counts for ISRW, 0/1 for SEP/SVM)."""

    torus: Torus
    occupation: np.ndarray

    def __post_init__(self):
        self.occupation = np.asarray(self.occupation)
        if self.occupation.shape != (self.torus.sites,):
            raise ValueError("occupation length != torus.sites")

    def copy(self):
        return EnvState(self.torus, self.occupation.copy())

    def particle_count(self):
        return float(self.occupation.sum())


def env_init(kind, torus, rho, rng):
    """Draw the stationary product start for `kind` at density rho.

    ISRW: i.i.d. Poisson(rho) counts; SEP/SVM: i.i.d. Bernoulli(rho);
    CONSTANT: every site holds the level rho.
    """
    if kind == EnvKind.ISRW:
        if not rho > 0:
            raise ValueError(f"ISRW requires rho > 0, got {rho}")
        occ = rng.poisson(rho, size=torus.sites).astype(np.int64)
    elif kind in (EnvKind.SEP, EnvKind.SVM):
        if not 0.0 < rho < 1.0:
            raise ValueError(f"{kind.value} requires 0 < rho < 1, got {rho}")
        occ = (rng.uniform(size=torus.sites) < rho).astype(np.int64)
    elif kind == EnvKind.CONSTANT:
        if not np.isfinite(rho):
            raise ValueError(f"CONSTANT level must be finite, got {rho}")
        occ = np.full(torus.sites, float(rho))
    else:
        raise ValueError(f"unknown environment kind {kind!r}")
    return EnvState(torus, occ)


# ---------------------------------------------------------------------------
# Per-site change index: exact value and integral queries.
# ---------------------------------------------------------------------------


class _SiteChangeIndex:
    """CSR-like per-site (time, value, running-integral) change lists."""

    def __init__(self, base_values, offsets, times, values, t_end):
        self.base = np.asarray(base_values, dtype=np.float64)
        self.offsets = offsets
        self.times = times
        self.values = values
        self.t_end = t_end
        # Integral of the site value from 0 up to each change time.
        n = len(times)
        if n:
            sites_of = np.repeat(
                np.arange(len(self.base)), np.diff(offsets)
            )
            starts = offsets[:-1][np.diff(offsets) > 0]
            prev_val = np.empty(n)
            prev_val[1:] = values[:-1]
            prev_val[starts] = self.base[sites_of[starts]]
            dt = np.empty(n)
            dt[1:] = times[1:] - times[:-1]
            dt[starts] = times[starts]
            contrib = np.cumsum(prev_val * dt)
            self.cumint = contrib - _segment_bases(sites_of, contrib)
        else:
            self.cumint = times

    def _locate(self, site, t):
        lo, hi = self.offsets[site], self.offsets[site + 1]
        j = np.searchsorted(self.times[lo:hi], t, side="right") + lo
        return lo, j

    def value_at(self, site, t):
        lo, j = self._locate(site, t)
        return float(self.base[site]) if j == lo else float(self.values[j - 1])

    def integral_to(self, site, t):
        """Exact integral of the site value over [0, t]."""
        lo, j = self._locate(site, t)
        if j == lo:
            return float(self.base[site]) * t
        seg_start = self.times[j - 1]
        return float(
            self.cumint[j - 1] + self.values[j - 1] * (t - seg_start)
        )

    def _grouped(self, sites, ts, fn_vectorized):
        sites = np.asarray(sites, dtype=np.int64)
        ts = np.asarray(ts, dtype=np.float64)
        out = np.empty(len(sites))
        order = np.argsort(sites, kind="stable")
        s_sorted = sites[order]
        bounds = np.flatnonzero(np.diff(s_sorted)) + 1
        groups = np.split(order, bounds)
        for grp in groups:
            if len(grp) == 0:
                continue
            site = int(sites[grp[0]])
            out[grp] = fn_vectorized(site, ts[grp])
        return out

    def _values_vec(self, site, ts):
        lo, hi = self.offsets[site], self.offsets[site + 1]
        j = np.searchsorted(self.times[lo:hi], ts, side="right")
        vals = np.concatenate(([self.base[site]], self.values[lo:hi]))
        return vals[j]

    def _integrals_vec(self, site, ts):
        lo, hi = self.offsets[site], self.offsets[site + 1]
        j = np.searchsorted(self.times[lo:hi], ts, side="right")
        seg_t0 = np.concatenate(([0.0], self.times[lo:hi]))
        seg_v = np.concatenate(([self.base[site]], self.values[lo:hi]))
        seg_c = np.concatenate(([0.0], self.cumint[lo:hi]))
        return seg_c[j] + seg_v[j] * (ts - seg_t0[j])

    def values_many(self, sites, ts):
        return self._grouped(sites, ts, self._values_vec)

    def integrals_many(self, sites, ts):
        return self._grouped(sites, ts, self._integrals_vec)


# ---------------------------------------------------------------------------
# Trajectory
# ---------------------------------------------------------------------------


@dataclass
class EnvTrajectory:
    """One realized catalyst path over [0, t_end], queryable at any (x, t)."""

    kind: EnvKind
    torus: Torus
    initial: EnvState
    t_end: float
    times: np.ndarray          # strictly increasing event times in (0, t_end]
    gaps: np.ndarray           # inter-event gaps; times == cumsum(gaps)
    payload_a: np.ndarray      # ISRW: particle id; SEP: edge id; SVM: site
    payload_b: np.ndarray      # ISRW: direction;  SEP: -1;      SVM: direction
    seed_info: tuple = (0, 0)  # (master_seed, stream_index) that produced it
    _final_occ: np.ndarray = field(default=None, repr=False)
    _index: _SiteChangeIndex = field(default=None, repr=False)
    _change_cache: tuple = field(default=None, repr=False)

    @property
    def n_events(self):
        return len(self.times)

    # -- derived change stream -------------------------------------------

    def _changes(self):
        """(times, sites, values) of actual per-site value changes, plus
        the final occupation; computed once from the minimal payload."""
        if self._change_cache is None:
            if self.kind == EnvKind.CONSTANT or self.n_events == 0:
                empty_i = np.empty(0, dtype=np.int64)
                self._change_cache = (np.empty(0), empty_i, np.empty(0))
                self._final_occ = self.initial.occupation.copy()
            elif self.kind == EnvKind.ISRW:
                frm, to, final = _isrw_sites(self)
                evt = np.repeat(np.arange(self.n_events), 2)
                site = np.column_stack((frm, to)).ravel()
                # Net per-event deltas: -1 at from, +1 at to. Running values
                # per site via segmented cumulative sums.
                delta = np.tile(np.array([-1, 1], dtype=np.int64),
                                self.n_events)
                order = np.lexsort((evt, site))
                s_sorted = site[order]
                cum = np.cumsum(delta[order])
                rel = cum - _segment_bases(s_sorted, cum)
                vals_sorted = self.initial.occupation[s_sorted] + rel
                back = np.empty(len(order), dtype=np.int64)
                back[order] = np.arange(len(order))
                values = vals_sorted[back].astype(np.float64)
                self._change_cache = (self.times[evt], site, values)
                self._final_occ = final
            else:
                occ = self.initial.occupation.astype(np.int64, copy=True)
                if self.kind == EnvKind.SEP:
                    eu, ev = _sep_edge_sites(self)
                    evt, site, vals = _kernels.sep_changes(eu, ev, occ)
                else:
                    sid, nid = _svm_event_sites(self)
                    evt, site, vals = _kernels.svm_changes(sid, nid, occ)
                self._change_cache = (
                    self.times[evt], site, vals.astype(np.float64)
                )
                self._final_occ = occ
        return self._change_cache

    def _site_index(self):
        if self._index is None:
            chg_t, chg_s, chg_v = self._changes()
            order = np.lexsort((chg_t, chg_s))
            s_sorted = chg_s[order]
            offsets = np.zeros(self.torus.sites + 1, dtype=np.int64)
            np.add.at(offsets, s_sorted + 1, 1)
            offsets = np.cumsum(offsets)
            self._index = _SiteChangeIndex(
                self.initial.occupation.astype(np.float64),
                offsets,
                chg_t[order],
                chg_v[order],
                self.t_end,
            )
        return self._index

    # -- queries -----------------------------------------------------------

    def _check_time(self, t):
        if not 0.0 <= t <= self.t_end:
            raise ValueError(f"time {t} outside [0, {self.t_end}]")

    def query(self, x, t):
        """xi(x, t); right-continuous piecewise-constant in t."""
        self._check_time(t)
        return self._site_index().value_at(int(x), float(t))

    def state_at(self, t):
        """Full occupation vector at time t, as float64."""
        self._check_time(t)
        idx = self._site_index()
        sites = np.arange(self.torus.sites)
        return idx.values_many(sites, np.full(self.torus.sites, float(t)))

    def final_state(self):
        self._changes()
        return EnvState(self.torus, self._final_occ.copy())

    def integral_at(self, x, t):
        """Exact integral of xi(x, s) over [0, t] (uncentered)."""
        self._check_time(t)
        return self._site_index().integral_to(int(x), float(t))

    def integrals_many(self, sites, ts):
        return self._site_index().integrals_many(sites, ts)

    def values_many(self, sites, ts):
        return self._site_index().values_many(sites, ts)

    def field_change_groups(self):
        """Change stream grouped by event time, for interval integrators.

        Returns (group_times, group_offsets, sites, values): changes
        sites[o_k:o_{k+1}] -> values[o_k:o_{k+1}] occur at group_times[k].
        """
        chg_t, chg_s, chg_v = self._changes()
        if len(chg_t) == 0:
            return (np.empty(0), np.zeros(1, dtype=np.int64),
                    chg_s, chg_v)
        bounds = np.flatnonzero(np.diff(chg_t) > 0) + 1
        group_starts = np.concatenate(([0], bounds))
        group_offsets = np.concatenate((group_starts, [len(chg_t)]))
        return chg_t[group_starts], group_offsets, chg_s, chg_v


def _segment_bases(group_keys, cum):
    """Per-element cumulative total accumulated before each group began.

    `group_keys` must be sorted so equal keys are contiguous; `cum` is a flat
    cumulative sum (any sign). Subtracting the result from `cum` yields
    within-group cumulative sums.
    """
    m = len(group_keys)
    if m == 0:
        return cum
    starts = np.flatnonzero(
        np.diff(group_keys, prepend=group_keys[0] - 1)
    )
    sizes = np.diff(np.append(starts, m))
    before = np.zeros(len(starts), dtype=cum.dtype)
    before[1:] = cum[starts[1:] - 1]
    return np.repeat(before, sizes)


def _isrw_sites(traj):
    """Vectorized from/to sites per ISRW event plus final occupation."""
    torus = traj.torus
    occ0 = traj.initial.occupation
    start_sites = np.repeat(np.arange(torus.sites), occ0)
    n = len(start_sites)
    particle = traj.payload_a
    dirs = traj.payload_b
    m = len(particle)
    if m == 0:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty, occ0.astype(np.int64).copy()
    axes = dirs >> 1
    steps = np.where(dirs & 1, -1, 1)
    disp = np.zeros((m, torus.d), dtype=np.int64)
    disp[np.arange(m), axes] = steps
    order = np.argsort(particle, kind="stable")
    p_sorted = particle[order]
    d_sorted = disp[order]
    cum = np.cumsum(d_sorted, axis=0)
    starts = np.flatnonzero(np.diff(p_sorted, prepend=p_sorted[0] - 1))
    sizes = np.diff(np.append(starts, m))
    before = np.zeros((len(starts), torus.d), dtype=np.int64)
    before[1:] = cum[starts[1:] - 1]
    rel = cum - np.repeat(before, sizes, axis=0)
    start_coords = torus.site_coords(start_sites)
    to_coords = start_coords[p_sorted] + rel
    from_coords = to_coords - d_sorted
    to_sites_sorted = np.asarray(torus.site_index(to_coords), dtype=np.int64)
    from_sites_sorted = np.asarray(
        torus.site_index(from_coords), dtype=np.int64
    )
    back = np.empty(m, dtype=np.int64)
    back[order] = np.arange(m)
    frm = from_sites_sorted[back]
    to = to_sites_sorted[back]
    # Final positions: start + total displacement per particle.
    total = np.zeros((n, torus.d), dtype=np.int64)
    last_of_particle = np.append(starts[1:] - 1, m - 1)
    total[p_sorted[last_of_particle]] = rel[last_of_particle]
    final_sites = np.asarray(
        torus.site_index(start_coords + total), dtype=np.int64
    )
    final_occ = np.bincount(final_sites, minlength=torus.sites).astype(np.int64)
    return frm, to, final_occ


def _sep_edge_sites(traj):
    edges = traj.torus.edge_table()
    return (edges[traj.payload_a, 0].astype(np.int64),
            edges[traj.payload_a, 1].astype(np.int64))


def _svm_event_sites(traj):
    nbr = traj.torus.neighbor_table()
    sid = traj.payload_a.astype(np.int64)
    nid = nbr[sid, traj.payload_b].astype(np.int64)
    return sid, nid


# ---------------------------------------------------------------------------
# Evolution
# ---------------------------------------------------------------------------


def _draw_event_times(rate, t_span, rng):
    """Poisson event epochs on (0, t_span] as (times, gaps), times=cumsum."""
    if rate <= 0.0 or t_span <= 0.0:
        return np.empty(0), np.empty(0)
    gaps = []
    total = 0.0
    block = max(256, int(rate * t_span * 1.2))
    while True:
        g = rng.exponential(1.0 / rate, size=block)
        gaps.append(g)
        total += g.sum()
        if total > t_span:
            break
    gaps = np.concatenate(gaps)
    times = np.cumsum(gaps)
    m = int(np.searchsorted(times, t_span, side="right"))
    return times[:m], gaps[:m]


def env_evolve(kind, state, t_span, rng):
    """Run the event-driven dynamics for t_span and return the trajectory."""
    if t_span < 0:
        raise ValueError(f"t_span must be >= 0, got {t_span}")
    torus = state.torus
    seed_info = (rng.master_seed, rng.stream_index)

    if kind == EnvKind.CONSTANT:
        return EnvTrajectory(
            kind, torus, state.copy(), float(t_span),
            np.empty(0), np.empty(0),
            np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64),
            seed_info,
        )

    occ = state.occupation
    if kind in (EnvKind.SEP, EnvKind.SVM):
        bad = ~np.isin(occ, (0, 1))
        if bad.any():
            raise ValueError(f"{kind.value} occupation must be 0/1")
    if kind == EnvKind.SVM:
        cap = SVM_TIME_CAP_FACTOR * torus.L**2
        if t_span > cap:
            raise ValueError(
                f"SVM runs are capped at t_span <= L^2/8 = {cap} "
                f"(consensus-time guard), got {t_span}"
            )

    if kind == EnvKind.ISRW:
        n_particles = int(occ.sum())
        times, gaps = _draw_event_times(float(n_particles), t_span, rng)
        m = len(times)
        pay_a = rng.integers(0, max(n_particles, 1), size=m).astype(np.int64)
        pay_b = rng.integers(0, 2 * torus.d, size=m).astype(np.int64)
    elif kind == EnvKind.SEP:
        n_edges = torus.d * torus.sites
        rate = n_edges / (2.0 * torus.d)
        times, gaps = _draw_event_times(rate, t_span, rng)
        m = len(times)
        pay_a = rng.integers(0, n_edges, size=m).astype(np.int64)
        pay_b = np.full(m, -1, dtype=np.int64)
    else:  # SVM
        times, gaps = _draw_event_times(float(torus.sites), t_span, rng)
        m = len(times)
        pay_a = rng.integers(0, torus.sites, size=m).astype(np.int64)
        pay_b = rng.integers(0, 2 * torus.d, size=m).astype(np.int64)

    return EnvTrajectory(
        kind, torus, state.copy(), float(t_span),
        times, gaps, pay_a, pay_b, seed_info,
    )


def env_integral(traj, x, t, rho):
    """Exact centered integral of xi(x, s) - rho over [0, t]."""
    if not 0.0 <= t <= traj.t_end:
        raise ValueError(f"t={t} outside [0, {traj.t_end}]")
    return traj.integral_at(x, t) - rho * t


# ---------------------------------------------------------------------------
# Portable binary trajectory record.
#
# Layout (little-endian):
#   magic   8s   b"PAMTRJ01"
#   kind    B    0=ISRW 1=SEP 2=SVM 3=CONSTANT
#   occ_f   B    1 if occupation stored as float64 (CONSTANT), else int64
#   d       H
#   L       I
#   t_end   d
#   seed    q    master_seed
#   stream  q    stream_index
#   n_ev    q
#   occupation  sites * (int64|float64)
#   gaps        n_ev * float64    (delta-encoded times; times = cumsum(gaps))
#   payload_a   n_ev * int32
#   payload_b   n_ev * int32
#
# Storing the gaps rather than the absolute times makes the record compact
# AND lossless: event times are generated as cumsum(gaps), so the loader's
# cumsum reproduces them bit-for-bit.
# ---------------------------------------------------------------------------

_MAGIC = b"PAMTRJ01"
_KIND_CODES = {
    EnvKind.ISRW: 0, EnvKind.SEP: 1, EnvKind.SVM: 2, EnvKind.CONSTANT: 3,
}
_KIND_FROM_CODE = {v: k for k, v in _KIND_CODES.items()}
_HEADER = struct.Struct("<8sBBHIdqqq")


def save_trajectory(traj, path_or_file):
    occ = traj.initial.occupation
    occ_float = occ.dtype.kind == "f"
    header = _HEADER.pack(
        _MAGIC,
        _KIND_CODES[traj.kind],
        1 if occ_float else 0,
        traj.torus.d,
        traj.torus.L,
        traj.t_end,
        int(traj.seed_info[0]),
        int(traj.seed_info[1]),
        traj.n_events,
    )
    own = not hasattr(path_or_file, "write")
    fh = open(path_or_file, "wb") if own else path_or_file
    try:
        fh.write(header)
        fh.write(np.ascontiguousarray(
            occ, dtype=np.float64 if occ_float else np.int64).tobytes())
        fh.write(np.ascontiguousarray(traj.gaps, dtype=np.float64).tobytes())
        fh.write(np.ascontiguousarray(traj.payload_a, dtype=np.int32).tobytes())
        fh.write(np.ascontiguousarray(traj.payload_b, dtype=np.int32).tobytes())
    finally:
        if own:
            fh.close()


def load_trajectory(path_or_file):
    own = not hasattr(path_or_file, "read")
    fh = open(path_or_file, "rb") if own else path_or_file
    try:
        raw = fh.read(_HEADER.size)
        (magic, kind_code, occ_float, d, L, t_end,
         seed, stream, n_ev) = _HEADER.unpack(raw)
        if magic != _MAGIC:
            raise ValueError(f"not a trajectory file: bad magic {magic!r}")
        torus = Torus(d, L)
        occ_dtype = np.float64 if occ_float else np.int64
        occ = np.frombuffer(
            fh.read(8 * torus.sites), dtype=occ_dtype).copy()
        gaps = np.frombuffer(fh.read(8 * n_ev), dtype=np.float64).copy()
        pay_a = np.frombuffer(fh.read(4 * n_ev), dtype=np.int32).copy()
        pay_b = np.frombuffer(fh.read(4 * n_ev), dtype=np.int32).copy()
    finally:
        if own:
            fh.close()
    times = np.cumsum(gaps)
    return EnvTrajectory(
        _KIND_FROM_CODE[kind_code], torus, EnvState(torus, occ),
        t_end, times, gaps,
        pay_a.astype(np.int64), pay_b.astype(np.int64),
        (seed, stream),
    )
