"""Exact sampling of (two-sided) fractional Brownian motion on dyadic grids.

Two generators with one law:

* circulant embedding of the fGn correlation sequence (O(N log N), the
  workhorse), and
* dense Cholesky factorization of the full covariance matrix (O(N^3), the
  small-scale oracle the fast path is validated against).

Both are deterministic functions of a SeedSpec.  Increments of two-sided
fBm form a single stationary fGn stream across the origin, so a two-sided
path is one circulant draw, cumulatively summed and re-anchored so that
the value at t = 0 is exactly zero.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .gaussian import HurstParam, as_hurst, fbm_covariance, fgn_correlation


class SpectralError(RuntimeError):
    """The circulant embedding produced a genuinely negative eigenvalue."""


class CholeskyError(RuntimeError):
    """The dense covariance factorization failed (non-PD numerical matrix)."""


#: eigenvalues of the unit-spacing correlation circulant below this abort;
#: tiny negatives above it are clamped to zero.
EIGENVALUE_FLOOR = -1e-9

#: default point-count cap for the O(N^3) Cholesky oracle
CHOLESKY_CAP = 2048


@dataclass(frozen=True)
class SeedSpec:
    """Deterministic RNG derivation: (master_seed, stream_id) -> generator.

    The generator state is seeded from SeedSequence(entropy=master_seed,
    spawn_key=(stream_id, *sub)), which is injective in the triple.
    Substreams extend the spawn key by one more index and are independent
    of the parent stream and of each other.
    """

    master_seed: int
    stream_id: int = 0
    sub: tuple[int, ...] = ()

    def rng(self) -> np.random.Generator:
        seq = np.random.SeedSequence(
            entropy=self.master_seed, spawn_key=(self.stream_id, *self.sub)
        )
        return np.random.default_rng(seq)

    def substream(self, k: int) -> "SeedSpec":
        return SeedSpec(self.master_seed, self.stream_id, self.sub + (k,))

    def stream(self, stream_id: int) -> "SeedSpec":
        return SeedSpec(self.master_seed, stream_id, self.sub)


@dataclass(frozen=True)
class GridSpec:
    """Dyadic grid of level n (spacing 2^-n) spanning [t_min, t_max] with
    t_min <= 0 < t_max, both multiples of 2^-n."""

    level: int
    t_min: float
    t_max: float

    def __post_init__(self):
        if self.level < 1:
            raise ValueError("grid level must be a positive integer")
        if not self.t_min <= 0.0 < self.t_max:
            raise ValueError("need t_min <= 0 < t_max")
        for name in ("t_min", "t_max"):
            val = getattr(self, name) * 2.0**self.level
            if abs(val - round(val)) > 1e-9:
                raise ValueError(f"{name} must be a multiple of 2^-level")

    @property
    def spacing(self) -> float:
        return 2.0**-self.level

    @property
    def i_min(self) -> int:
        return round(self.t_min * 2**self.level)

    @property
    def i_max(self) -> int:
        return round(self.t_max * 2**self.level)

    @property
    def npoints(self) -> int:
        return self.i_max - self.i_min + 1

    @property
    def zero_index(self) -> int:
        return -self.i_min

    def times(self) -> np.ndarray:
        return np.arange(self.i_min, self.i_max + 1) * self.spacing

    def index_of(self, t: float) -> int:
        """Array index of the grid point t; rejects off-grid t."""
        i = t * 2**self.level
        if abs(i - round(i)) > 1e-9:
            raise ValueError(f"t={t} is not on the level-{self.level} grid")
        i = round(i)
        if not self.i_min <= i <= self.i_max:
            raise ValueError(f"t={t} lies outside [{self.t_min}, {self.t_max}]")
        return i - self.i_min


@dataclass(frozen=True)
class FbmPath:
    """fBm values on a dyadic grid, anchored so the value at t = 0 is 0."""

    grid: GridSpec
    h: HurstParam
    values: np.ndarray
    seed: SeedSpec | None = None

    def __post_init__(self):
        if len(self.values) != self.grid.npoints:
            raise ValueError("values length does not match grid point count")
        if self.values[self.grid.zero_index] != 0.0:
            raise ValueError("path must be anchored: value at t=0 must be exactly 0")

    def value_at(self, t: float) -> float:
        return float(self.values[self.grid.index_of(t)])

    def steps_right_of_zero(self) -> int:
        """Number of grid steps between t=0 and t_max."""
        return self.grid.i_max


def make_path(level: int, values, h, t_min: float = 0.0, seed: SeedSpec | None = None) -> FbmPath:
    """Wrap explicit grid values (e.g. hand-built test paths) as an FbmPath."""
    values = np.asarray(values, dtype=float)
    t_max = t_min + (len(values) - 1) * 2.0**-level
    grid = GridSpec(level=level, t_min=t_min, t_max=t_max)
    return FbmPath(grid=grid, h=as_hurst(h), values=values, seed=seed)


@functools.lru_cache(maxsize=64)
def _circulant_spectrum(h: float, count: int) -> np.ndarray:
    """FFT eigenvalues of the unit-spacing fGn correlation circulant.

    The correlation sequence rho(0..count) is embedded in a circulant of
    length 2*count.  Eigenvalues below EIGENVALUE_FLOOR abort (silent
    regularization would corrupt rate measurements); tiny negatives are
    clamped to zero.
    """
    rho = fgn_correlation(HurstParam(h), np.arange(count + 1))
    emb = np.concatenate([rho, rho[-2:0:-1]])
    lam = np.fft.fft(emb).real
    lam_min = float(lam.min())
    if lam_min < EIGENVALUE_FLOOR:
        raise SpectralError(
            f"circulant embedding for h={h}, count={count} has eigenvalue "
            f"{lam_min:.3e} < {EIGENVALUE_FLOOR:g}"
        )
    lam = np.clip(lam, 0.0, None)
    lam.flags.writeable = False
    return lam


def sample_fgn_circulant(h, count: int, spacing: float, seed: SeedSpec, size: int | None = None):
    """Stationary fGn with covariance spacing^2H * rho_H(|i-j|).

    Returns a vector of length `count`, or a (size, count) array when
    `size` is given (batch rows are consecutive draws from the same
    stream).  Fixed seed means bit-identical output.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if spacing <= 0.0:
        raise ValueError("spacing must be positive")
    hp = as_hurst(h)
    lam = _circulant_spectrum(hp.h, count)
    m2 = lam.shape[0]  # 2*count
    mid = m2 // 2
    rows = 1 if size is None else int(size)
    rng = seed.rng()
    normals = rng.standard_normal((rows, m2))
    z = np.empty((rows, m2), dtype=complex)
    z[:, 0] = normals[:, 0]
    z[:, mid] = normals[:, 1]
    re = normals[:, 2 : mid + 1]
    im = normals[:, mid + 1 :]
    z[:, 1:mid] = (re + 1j * im) / math.sqrt(2.0)
    z[:, mid + 1 :] = np.conj(z[:, 1:mid][:, ::-1])
    fgn = np.fft.ifft(np.sqrt(lam) * z, axis=1).real[:, :count] * math.sqrt(m2)
    fgn *= spacing**hp.h
    return fgn[0] if size is None else fgn


@functools.lru_cache(maxsize=32)
def _cholesky_factor(h: float, grid: GridSpec) -> np.ndarray:
    """Lower Cholesky factor of C_H on the grid points with t=0 removed."""
    pts = grid.times()
    pts = np.delete(pts, grid.zero_index)
    cov = fbm_covariance(HurstParam(h), pts[:, None], pts[None, :])
    try:
        chol = scipy.linalg.cholesky(cov, lower=True)
    except scipy.linalg.LinAlgError as exc:  # report the offending minor
        raise CholeskyError(f"covariance factorization failed on {grid}: {exc}") from exc
    chol.flags.writeable = False
    return chol


def sample_fbm_cholesky(
    h, grid: GridSpec, seed: SeedSpec, size: int | None = None, cap: int = CHOLESKY_CAP
):
    """Exact-law fBm path via dense Cholesky; the small-scale oracle.

    The point t=0 is excluded from the factorized set and pinned to 0.
    """
    if grid.npoints > cap:
        raise ValueError(f"grid has {grid.npoints} points, above the Cholesky cap {cap}")
    hp = as_hurst(h)
    chol = _cholesky_factor(hp.h, grid)
    rows = 1 if size is None else int(size)
    rng = seed.rng()
    z = rng.standard_normal((rows, chol.shape[0]))
    vals = z @ chol.T
    vals = np.insert(vals, grid.zero_index, 0.0, axis=1)
    if size is None:
        return FbmPath(grid=grid, h=hp, values=vals[0], seed=seed)
    return vals


def sample_fbm(h, grid: GridSpec, seed: SeedSpec, size: int | None = None):
    """Two-sided fBm path: one stationary fGn stream over [t_min, t_max],
    cumulatively summed and re-anchored to 0 at t = 0."""
    hp = as_hurst(h)
    fgn = sample_fgn_circulant(hp, grid.npoints - 1, grid.spacing, seed, size=size)
    fgn = np.atleast_2d(fgn)
    vals = np.concatenate([np.zeros((fgn.shape[0], 1)), np.cumsum(fgn, axis=1)], axis=1)
    vals -= vals[:, grid.zero_index : grid.zero_index + 1]
    if size is None:
        return FbmPath(grid=grid, h=hp, values=vals[0], seed=seed)
    return vals
