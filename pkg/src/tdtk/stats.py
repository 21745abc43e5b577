"""Scene data model and second-order statistics.

A Scene is N pixel vectors of L bands in band-interleaved-by-pixel order
(row-major (N, L) float64). Statistics use the population divisor N, so the
identity R = K + m·mᵀ holds exactly. A non-negative ridge ε is added to the
diagonal of K and R before factorization; all solves go through the cached
Cholesky factors, and shifted-correlation inverses use the Sherman-Morrison
update of the covariance factorization rather than refactorizing per origin.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve, LinAlgError

from . import _kernels
from .errors import DimensionMismatch, NonFinite, Singular

__all__ = [
    "Scene",
    "SceneStats",
    "compute_stats",
    "shifted_correlation",
    "sherman_morrison_inverse",
    "shifted_correlation_inverse",
    "solve_spd",
]


@dataclass(frozen=True)
class Scene:
    """A width×height multiband raster flattened to pixel vectors.

    values has shape (width*height, bands); pixel (x, y) is row y*width + x.
    """

    width: int
    height: int
    values: np.ndarray

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise DimensionMismatch("scene values must be a 2-D (pixels, bands) array")
        n, bands = values.shape
        if self.width <= 0 or self.height <= 0 or self.width * self.height != n:
            raise DimensionMismatch(
                f"width*height = {self.width}*{self.height} != {n} pixels")
        if n < 1 or bands < 1:
            raise DimensionMismatch("a scene needs at least 1 pixel and 1 band")
        if not np.isfinite(values).all():
            raise NonFinite("scene contains NaN or infinite values")
        object.__setattr__(self, "values", values)

    @property
    def n_pixels(self):
        return self.values.shape[0]

    @property
    def bands(self):
        return self.values.shape[1]


def as_band_vector(v, bands, name="vector"):
    """Coerce to a finite float64 vector of the scene's band count."""
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    if v.shape[0] != bands:
        raise DimensionMismatch(f"{name} has {v.shape[0]} entries, scene has {bands} bands")
    if not np.isfinite(v).all():
        raise NonFinite(f"{name} contains NaN or infinite values")
    return v


@dataclass(frozen=True)
class SceneStats:
    """Mean, covariance, correlation and their cached SPD factorizations.

    Factorizations are computed on first solve and cached (a concurrent
    first solve may factor twice; the results are identical). A singular
    matrix at the configured ridge raises Singular at that point, so plain
    moment inspection works even for rank-deficient scenes.
    """

    n: int
    m: np.ndarray
    K: np.ndarray
    R: np.ndarray
    ridge: float
    _factors: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def bands(self):
        return self.m.shape[0]

    def _factor(self, which):
        cached = self._factors.get(which)
        if cached is None:
            matrix = self.K if which == "covariance" else self.R
            a = matrix.copy()
            a[np.diag_indices_from(a)] += self.ridge
            try:
                cached = cho_factor(a, lower=True)
            except LinAlgError as exc:
                raise Singular(
                    f"{which} + {self.ridge}*I is not positive definite") from exc
            self._factors[which] = cached
        return cached

    def solve_covariance(self, b):
        """x with (K + ridge·I) x = b; b may be a vector or a matrix."""
        return cho_solve(self._factor("covariance"),
                         np.asarray(b, dtype=np.float64))

    def solve_correlation(self, b):
        """x with (R + ridge·I) x = b."""
        return cho_solve(self._factor("correlation"),
                         np.asarray(b, dtype=np.float64))


def compute_stats(scene, ridge=0.0):
    """Population mean/covariance/correlation of a scene.

    Accumulation is 64-bit and sequential (compiled backend: strict pixel
    order; numpy backend: BLAS blocking); both matrices are symmetrized by
    averaging with their transpose before factorization.
    """
    if not isinstance(scene, Scene):
        raise DimensionMismatch("compute_stats expects a Scene")
    if scene.n_pixels < 2:
        raise DimensionMismatch("statistics need at least 2 pixels")
    if ridge < 0:
        raise ValueError("ridge must be non-negative")
    m, k, r = _kernels.accumulate_moments(scene.values)
    k = 0.5 * (k + k.T)
    r = 0.5 * (r + r.T)
    return SceneStats(n=scene.n_pixels, m=m, K=k, R=r, ridge=float(ridge))


def shifted_correlation(stats, mu):
    """Second moment about the origin mu: K + (m-mu)(m-mu)ᵀ.

    Equals K at mu = m and the raw correlation R at mu = 0.
    """
    mu = as_band_vector(mu, stats.bands, "mu")
    delta = stats.m - mu
    return stats.K + np.outer(delta, delta)


def sherman_morrison_inverse(k_inv_apply, m, mu):
    """Inverse of K + (m-mu)(m-mu)ᵀ from a solver for K.

    k_inv_apply maps an (L,) vector or (L, L) matrix b to K⁻¹b. The rank-one
    update costs one extra solve instead of a refactorization:
    (K + δδᵀ)⁻¹ = K⁻¹ - K⁻¹δ δᵀK⁻¹ / (1 + δᵀK⁻¹δ), δ = m - mu.
    """
    m = np.asarray(m, dtype=np.float64).reshape(-1)
    mu = as_band_vector(mu, m.shape[0], "mu")
    k_inv = np.asarray(k_inv_apply(np.eye(m.shape[0])), dtype=np.float64)
    delta = m - mu
    y = k_inv @ delta
    denom = 1.0 + delta @ y
    return k_inv - np.outer(y, y) / denom


def shifted_correlation_inverse(stats, mu):
    """Dense R_mu⁻¹ via the Sherman-Morrison update of the cached K factor."""
    return sherman_morrison_inverse(stats.solve_covariance, stats.m, mu)


def apply_shifted_inverse(stats, mu, b):
    """R_mu⁻¹ b without forming the inverse (two cached-factor solves)."""
    mu = as_band_vector(mu, stats.bands, "mu")
    b = np.asarray(b, dtype=np.float64)
    delta = stats.m - mu
    x = stats.solve_covariance(b)
    y = stats.solve_covariance(delta)
    return x - y * (delta @ x) / (1.0 + delta @ y)


def solve_spd(stats, which, b):
    """Shared linear solve against (K + ridge·I) or (R + ridge·I)."""
    b = np.asarray(b, dtype=np.float64)
    if b.shape[0] != stats.bands:
        raise DimensionMismatch(f"rhs has {b.shape[0]} rows, stats have {stats.bands} bands")
    if which == "covariance":
        return stats.solve_covariance(b)
    if which == "correlation":
        return stats.solve_correlation(b)
    raise ValueError(f"unknown matrix selector {which!r}")
