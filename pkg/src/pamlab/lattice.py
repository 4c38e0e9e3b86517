"""Torus geometry, discrete Laplacian, walk heat kernel and Green function.

The deterministic substrate: a periodic d-dimensional lattice of side L, the
nearest-neighbor Laplacian acting on per-site fields, the transition kernel of
the continuous-time simple random walk (total jump rate 2dκ), and the
time-truncated Green function at the origin for the rate-1 walk. Everything
here is exact up to floating rounding; no Monte Carlo.

Site indexing is the C-order raveling of coordinates in (Z/LZ)^d, so site 0 is
the origin and site 1 is the origin's neighbor in the last (fastest) axis.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np
import scipy.sparse

__all__ = [
    "Torus",
    "Field",
    "Params",
    "GreenFunctionValue",
    "WalkPath",
    "laplacian_apply",
    "laplacian_matrix",
    "heat_kernel",
    "heat_kernel_origin_values",
    "green_function_origin",
    "rw_sample_path",
]


@dataclass(frozen=True)
class Torus:
    """Periodic lattice (Z/LZ)^d. Immutable and shareable across workers."""

    d: int
    L: int

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"dimension must be >= 1, got {self.d}")
        if self.L < 4:
            raise ValueError(f"side length must be >= 4, got {self.L}")

    @property
    def sites(self):
        return self.L**self.d

    @property
    def shape(self):
        return (self.L,) * self.d

    @property
    def origin(self):
        return 0

    @property
    def unit_neighbor(self):
        """Site index of origin + e (unit step along the last axis)."""
        return 1

    def site_coords(self, sites):
        """Coordinates (..., d) of flat site indices."""
        return np.stack(
            np.unravel_index(np.asarray(sites), self.shape), axis=-1
        )

    def site_index(self, coords):
        """Flat site indices of coordinate arrays shaped (..., d)."""
        coords = np.mod(np.asarray(coords), self.L)
        return np.ravel_multi_index(
            tuple(np.moveaxis(coords, -1, 0)), self.shape
        )

    def neighbor_table(self):
        """(sites, 2d) int array; columns alternate +axis/-axis steps."""
        return _neighbor_table(self.d, self.L)

    def edge_table(self):
        """(d * sites, 2) array of unordered nearest-neighbor edges.

        Edge k with axis a = k // sites joins site k % sites to its +a
        neighbor; every undirected edge appears exactly once.
        """
        return _edge_table(self.d, self.L)


def _cached_by_geometry(builder):
    cache = {}

    def wrapper(d, L):
        key = (d, L)
        if key not in cache:
            cache[key] = builder(d, L)
        return cache[key]

    return wrapper


@_cached_by_geometry
def _neighbor_table(d, L):
    sites = L**d
    idx = np.arange(sites)
    coords = np.stack(np.unravel_index(idx, (L,) * d), axis=-1)
    table = np.empty((sites, 2 * d), dtype=np.int64)
    for axis in range(d):
        for j, step in enumerate((1, -1)):
            shifted = coords.copy()
            shifted[:, axis] = (shifted[:, axis] + step) % L
            table[:, 2 * axis + j] = np.ravel_multi_index(
                tuple(shifted.T), (L,) * d
            )
    table.setflags(write=False)
    return table


@_cached_by_geometry
def _edge_table(d, L):
    sites = L**d
    nbr = _neighbor_table(d, L)
    edges = np.empty((d * sites, 2), dtype=np.int64)
    for axis in range(d):
        edges[axis * sites : (axis + 1) * sites, 0] = np.arange(sites)
        edges[axis * sites : (axis + 1) * sites, 1] = nbr[:, 2 * axis]
    edges.setflags(write=False)
    return edges


@_cached_by_geometry
def _laplacian_csr(d, L):
    sites = L**d
    nbr = _neighbor_table(d, L)
    rows = np.repeat(np.arange(sites), 2 * d)
    cols = nbr.ravel()
    data = np.ones(sites * 2 * d)
    lap = scipy.sparse.csr_matrix(
        (data, (rows, cols)), shape=(sites, sites)
    )
    lap -= scipy.sparse.diags(np.full(sites, 2.0 * d))
    return lap.tocsr()


@dataclass
class Field:
    """A real value per torus site (flat, C-order indexed)."""

    torus: Torus
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (self.torus.sites,):
            raise ValueError(
                f"field length {self.values.shape} != sites {self.torus.sites}"
            )


@dataclass(frozen=True)
class Params:
    """Model constants: diffusion kappa, coupling gamma, catalyst density rho."""

    kappa: float
    gamma: float
    rho: float

    def __post_init__(self):
        if not (self.kappa >= 0.0):
            raise ValueError(f"kappa must be >= 0, got {self.kappa}")
        if not (self.gamma > 0.0):
            raise ValueError(f"gamma must be > 0, got {self.gamma}")
        if not np.isfinite(self.rho):
            raise ValueError(f"rho must be finite, got {self.rho}")


def laplacian_apply(u, kappa):
    """kappa * sum over neighbors of [u(y) - u(x)], as a new Field.

    The row sums of the operator vanish, so the returned field sums to zero
    up to rounding; a constant field maps to zero exactly.
    """
    torus = u.torus
    nbr = torus.neighbor_table()
    v = u.values[nbr].sum(axis=1) - 2.0 * torus.d * u.values
    return Field(torus, kappa * v)


def laplacian_matrix(torus):
    """The Laplacian as a sparse CSR matrix (unit kappa)."""
    return _laplacian_csr(torus.d, torus.L)


def _axis_eigenvalues(L, kappa):
    # 1-d circulant generator with per-edge rate kappa: jump rate 2*kappa.
    k = np.arange(L)
    return 2.0 * kappa * (np.cos(2.0 * np.pi * k / L) - 1.0)


def _axis_kernel(L, kappa, t):
    lam = _axis_eigenvalues(L, kappa)
    q = np.fft.ifft(np.exp(lam * t)).real
    # Rounding can leave ~1e-17 negatives at far sites for tiny t.
    return np.maximum(q, 0.0)


def heat_kernel(torus, kappa, t):
    """Distribution at time t of the rate-2dκ walk started at the origin.

    Computed by per-axis spectral decomposition of the circulant 1-d
    generator; the d-dimensional kernel is the product across axes because
    the coordinates of the walk are independent rate-2κ one-dimensional
    walks. Exact to rounding: mass 1 within 1e-10, symmetric, nonnegative.
    """
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    if kappa < 0:
        raise ValueError(f"kappa must be >= 0, got {kappa}")
    if t == 0.0 or kappa == 0.0:
        values = np.zeros(torus.sites)
        values[0] = 1.0
        return Field(torus, values)
    q = _axis_kernel(torus.L, kappa, t)
    full = reduce(np.multiply.outer, [q] * torus.d)
    return Field(torus, np.asarray(full).ravel())


def heat_kernel_origin_values(torus, kappa, t_grid):
    """p_t(0) and p_t(e) on a grid of times, in one spectral pass."""
    t_grid = np.asarray(t_grid, dtype=np.float64)
    lam = _axis_eigenvalues(torus.L, kappa)
    ek = np.exp(np.multiply.outer(t_grid, lam))  # (nt, L)
    q0 = ek.mean(axis=1)
    qe = (ek * np.cos(2.0 * np.pi * np.arange(torus.L) / torus.L)).mean(axis=1)
    p0 = q0**torus.d
    pe = qe * q0 ** (torus.d - 1)
    return p0, pe


@dataclass(frozen=True)
class GreenFunctionValue:
    """Truncated Green function with its approximation report.

    value            : integral of p_t(0) dt over [0, t_cut], rate-1 walk
    tail_estimate    : bound on the missing (t_cut, infinity) free-lattice tail,
                       from a C * t^(-d/2) fit on the computed range
    wraparound_mass  : the t_cut / L^d equilibrium contribution inside `value`
    """

    value: float
    tail_estimate: float
    wraparound_mass: float
    t_cut: float
    d: int
    L: int


def green_function_origin(d, t_cut, torus, max_wrap_fraction=0.02):
    """Integral of p_t(0) over [0, t_cut] for the rate-1 walk, with report.

    Exact closed form from the spectral decomposition: the zero mode
    contributes t_cut / L^d (the wrap-around mass) and each nonzero mode k
    contributes (exp(lambda_k t_cut) - 1) / lambda_k / L^d. Rejects d < 3
    (the walk must be transient for the Green function to mean anything) and
    tori whose wrap-around mass exceeds max_wrap_fraction of the value.
    """
    if d < 3:
        raise ValueError(f"Green function requires d >= 3, got {d}")
    if torus.d != d:
        raise ValueError(f"torus dimension {torus.d} != requested d {d}")
    if t_cut <= 0:
        raise ValueError(f"t_cut must be > 0, got {t_cut}")
    L = torus.L
    # Rate-1 total jump rate: per-axis edge rate kappa with 2*d*kappa = 1.
    lam_axis = _axis_eigenvalues(L, 1.0 / (2.0 * d))
    lam = reduce(np.add.outer, [lam_axis] * d).ravel()
    nonzero = lam < -1e-15
    value = t_cut / L**d
    wrap = value
    value += (
        np.expm1(lam[nonzero] * t_cut) / lam[nonzero]
    ).sum() / L**d

    # Tail: fit p_t(0) - L^-d ~ C t^(-d/2) near the cutoff, integrate beyond.
    t_fit = np.array([0.5 * t_cut, 0.75 * t_cut, t_cut])
    p_fit, _ = heat_kernel_origin_values(torus, 1.0 / (2.0 * d), t_fit)
    excess = np.maximum(p_fit - 1.0 / L**d, 0.0)
    C = float(np.max(excess * t_fit ** (d / 2.0)))
    tail = C * t_cut ** (1.0 - d / 2.0) / (d / 2.0 - 1.0)

    if wrap > max_wrap_fraction * value:
        raise ValueError(
            f"wrap-around mass {wrap:.3g} exceeds {max_wrap_fraction:.0%} of "
            f"the integral {value:.3g}; increase L or reduce t_cut"
        )
    return GreenFunctionValue(
        value=float(value),
        tail_estimate=float(tail),
        wraparound_mass=float(wrap),
        t_cut=float(t_cut),
        d=d,
        L=L,
    )


@dataclass
class WalkPath:
    """Piecewise-constant walk path on the torus, started at site 0.

    times : strictly increasing jump times in (0, t_end]
    sites : site occupied immediately after each jump
    """

    torus: Torus
    kappa: float
    t_end: float
    times: np.ndarray
    sites: np.ndarray

    @property
    def jump_count(self):
        return len(self.times)

    def position(self, s):
        """Site occupied at time s (right-continuous)."""
        if not 0.0 <= s <= self.t_end:
            raise ValueError(f"time {s} outside [0, {self.t_end}]")
        i = np.searchsorted(self.times, s, side="right")
        return 0 if i == 0 else int(self.sites[i - 1])

    def segments(self):
        """(start, end, site) triples covering [0, t_end]."""
        starts = np.concatenate(([0.0], self.times))
        ends = np.concatenate((self.times, [self.t_end]))
        sites = np.concatenate(([0], self.sites))
        return starts, ends, sites


def rw_sample_path(torus, kappa, t_end, rng):
    """Sample one rate-2dκ simple random walk path on [0, t_end].

    Jump epochs are a Poisson process of rate 2dκ; each jump moves to a
    uniformly chosen nearest neighbor.
    """
    if t_end < 0:
        raise ValueError(f"t_end must be >= 0, got {t_end}")
    rate = 2.0 * torus.d * kappa
    if rate == 0.0 or t_end == 0.0:
        return WalkPath(
            torus, kappa, t_end,
            np.empty(0), np.empty(0, dtype=np.int64),
        )
    n = int(rng.poisson(rate * t_end))
    times = np.sort(rng.uniform(0.0, t_end, size=n))
    dirs = rng.integers(0, 2 * torus.d, size=n)
    axes = dirs >> 1
    steps = np.where(dirs & 1, -1, 1)
    disp = np.zeros((n, torus.d), dtype=np.int64)
    disp[np.arange(n), axes] = steps
    coords = np.mod(np.cumsum(disp, axis=0), torus.L)
    sites = torus.site_index(coords) if n else np.empty(0, dtype=np.int64)
    return WalkPath(torus, kappa, t_end, times, np.asarray(sites, dtype=np.int64))
