"""CEM, MF and origin-shifted (CE) detectors plus the CE objective.

All three detectors share one construction: solve the second-moment matrix
about an origin against the origin-shifted target and normalize to unit gain,
w = M⁻¹(d-o) / ((d-o)ᵀM⁻¹(d-o)). CEM uses the raw correlation (origin 0),
MF the covariance (origin m), CE the shifted correlation R_mu at an arbitrary
origin mu. The average filter output energy of each is the reciprocal of its
normalizing quadratic form.

The CE objective g(mu) = (d-mu)ᵀR_mu⁻¹(d-mu) and its analytic gradient are
evaluated through the Sherman-Morrison update of the cached covariance
factorization, never by refactorizing R_mu. With v = d-mu, delta = m-mu,
b = vᵀK⁻¹delta, t = deltaᵀK⁻¹delta:

    g(mu)  = vᵀK⁻¹v - b²/(1+t)
    g'(mu) = 2(1+t-b)/(1+t)² · (b·K⁻¹delta - (1+t)·K⁻¹v)

so g' vanishes exactly when 1+t-b = 0, which is the basic-equation
hyperplane (d-m)ᵀK⁻¹(m-mu) = 1, or in the degenerate bracket case mu = d.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateTarget, PreconditionFailed
from .stats import as_band_vector

__all__ = [
    "Detector",
    "ObjectiveReport",
    "EquivalenceReport",
    "cem",
    "mf",
    "ce_detector",
    "g_value",
    "g_gradient",
    "objective_report",
    "verify_equivalence",
]

QUADRATIC_FORM_TOL = 1e-12
BASIC_EQUATION_TOL = 1e-8


@dataclass(frozen=True)
class Detector:
    """Filter w with its data origin; w·(d - origin) = 1 by construction."""

    w: np.ndarray
    origin: np.ndarray
    method: str
    energy: float


@dataclass(frozen=True)
class ObjectiveReport:
    """g, its gradient and the implied output energy at one origin."""

    mu: np.ndarray
    g: float
    grad: np.ndarray
    energy: float


@dataclass(frozen=True)
class EquivalenceReport:
    """Measured agreement of the CE and MF filter directions."""

    cosine: float
    c: float
    residual: float


def _normalize(x, quad, origin, method):
    if quad <= QUADRATIC_FORM_TOL:
        raise DegenerateTarget(
            f"{method}: target quadratic form {quad:.3e} is not positive")
    return Detector(w=x / quad, origin=origin, method=method, energy=1.0 / quad)


def cem(stats, d):
    """Constrained-energy-minimization detector: w = R⁻¹d / dᵀR⁻¹d."""
    d = as_band_vector(d, stats.bands, "target")
    x = stats.solve_correlation(d)
    return _normalize(x, float(d @ x), np.zeros(stats.bands), "CEM")


def mf(stats, d):
    """Matched filter: w = K⁻¹(d-m) / (d-m)ᵀK⁻¹(d-m), origin at the mean."""
    d = as_band_vector(d, stats.bands, "target")
    delta = d - stats.m
    if np.linalg.norm(delta) <= 1e-12 * (1.0 + np.linalg.norm(d)):
        raise DegenerateTarget("MF: target equals the scene mean")
    x = stats.solve_covariance(delta)
    return _normalize(x, float(delta @ x), stats.m.copy(), "MF")


def _shifted_pieces(stats, d, mu):
    """Solves shared by the CE detector, objective and gradient."""
    d = as_band_vector(d, stats.bands, "target")
    mu = as_band_vector(mu, stats.bands, "mu")
    v = d - mu
    delta = stats.m - mu
    x = stats.solve_covariance(v)
    y = stats.solve_covariance(delta)
    b = float(delta @ x)
    t = float(delta @ y)
    return d, mu, v, delta, x, y, b, t


def ce_detector(stats, d, mu):
    """Origin-shifted detector w = R_mu⁻¹(d-mu) / (d-mu)ᵀR_mu⁻¹(d-mu).

    Reduces to cem at mu = 0 and to mf at mu = m.
    """
    d, mu, v, delta, x, y, b, t = _shifted_pieces(stats, d, mu)
    if np.linalg.norm(v) <= 1e-12 * (1.0 + np.linalg.norm(d)):
        raise DegenerateTarget("CE: target equals the origin")
    u = x - y * (b / (1.0 + t))
    return _normalize(u, float(v @ u), mu, "CE")


def g_value(stats, d, mu):
    """CE objective g(mu) = (d-mu)ᵀR_mu⁻¹(d-mu); zero exactly at mu = d."""
    _, _, v, _, x, _, b, t = _shifted_pieces(stats, d, mu)
    g = float(v @ x) - b * b / (1.0 + t)
    return max(g, 0.0)


def g_gradient(stats, d, mu):
    """Analytic gradient of g; vanishes on the basic-equation hyperplane."""
    _, _, v, delta, x, y, b, t = _shifted_pieces(stats, d, mu)
    denom = 1.0 + t
    scale = 2.0 * (denom - b) / (denom * denom)
    return scale * (b * y - denom * x)


def objective_report(stats, d, mu):
    """g, gradient and implied energy bundled for one origin."""
    mu = as_band_vector(mu, stats.bands, "mu")
    g = g_value(stats, d, mu)
    grad = g_gradient(stats, d, mu)
    energy = 1.0 / g if g > 0.0 else float("inf")
    return ObjectiveReport(mu=mu, g=g, grad=grad, energy=energy)


def verify_equivalence(stats, d, mu_star, residual_tol=BASIC_EQUATION_TOL):
    """Measure how exactly the CE detector at mu_star matches MF.

    Requires mu_star to satisfy the basic equation within residual_tol.
    Returns the cosine between u = R_mu*⁻¹(d-mu*) and v = K⁻¹(d-m), the
    least-squares scalar c minimizing ‖u - c·v‖, and that residual relative
    to ‖v‖. The equivalence theorem predicts cosine = 1, c = 1, residual 0.
    """
    d, mu_star, vshift, delta, x, y, b, t = _shifted_pieces(stats, d, mu_star)
    v = stats.solve_covariance(d - stats.m)
    residual = float(v @ (stats.m - mu_star)) - 1.0
    if abs(residual) > residual_tol:
        raise PreconditionFailed(
            f"mu is not a basic-equation solution (residual {residual:.3e})")
    u = x - y * (b / (1.0 + t))
    vv = float(v @ v)
    if vv == 0.0:
        raise DegenerateTarget("target equals the scene mean")
    c = float(v @ u) / vv
    cosine = float(u @ v) / (np.linalg.norm(u) * np.linalg.norm(v))
    ls_residual = float(np.linalg.norm(u - c * v)) / float(np.sqrt(vv))
    return EquivalenceReport(cosine=cosine, c=c, residual=ls_residual)
