"""Optimal data origins, two ways, and their cross-checks.

Closed form: every local maximum of the CE objective lies on the hyperplane
(d-m)ᵀK⁻¹(m-mu) = 1 (the basic equation), an affine set of dimension L-1.
With u = K⁻¹(d-m) the smallest shift from the mean is mu* = m - u/‖u‖², the
shift along the target line is mu* = m - (d-m)/((d-m)ᵀK⁻¹(d-m)), and the
rest of the solution set is reached by adding tangent combinations from an
orthonormal basis of {z : uᵀz = 0} (built by a deterministic Householder
reflection, so sampled solutions are reproducible).

Iterative: steepest ascent on g with warm-started Armijo backtracking.
Convergence is declared only when the small-gradient test lands on the
hyperplane (residual and plateau-value checks), because g also has a
spurious critical point at mu = d where g = 0 is the global minimum; a
stall there triggers a single deterministic restart from the reflection
2m - mu before giving up. In the terminal basin the residual is linear
along the ascent direction (u = K⁻¹(d-m) is constant), so the last
iterates may pick their step by solving that 1-D equation instead of
backtracking; they are still plain mu + step·g'(mu) steps.

Every origin on the hyperplane gives the same objective value
g = (d-m)ᵀK⁻¹(d-m) + 1 (the plateau), which is what gradient ascent is
checked against.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateTarget, DimensionMismatch, PreconditionFailed
from .detectors import g_value, g_gradient
from .stats import as_band_vector

__all__ = [
    "AscentConfig",
    "AscentTrace",
    "BasicEquationSolution",
    "basic_equation_residual",
    "gradient_ascent",
    "g_surface_grid",
    "hyperplane_basis",
    "hyperplane_line",
    "plateau_value",
    "solve_basic_equation",
]

SOLUTION_RESIDUAL_TOL = 1e-9
CONVERGED_RESIDUAL_TOL = 1e-6
CONVERGED_PLATEAU_RTOL = 1e-6


@dataclass(frozen=True)
class BasicEquationSolution:
    """One origin on the optimal hyperplane with its verified residual."""

    mu_star: np.ndarray
    residual: float
    kind: str


@dataclass(frozen=True)
class AscentConfig:
    max_iters: int = 500
    grad_tol: float = 1e-8
    initial_step: float = 1.0
    backtrack_factor: float = 0.5
    armijo_c: float = 1e-4

    def __post_init__(self):
        if self.max_iters <= 0 or self.grad_tol <= 0 or self.initial_step <= 0:
            raise ValueError("ascent config values must be positive")
        if not 0.0 < self.backtrack_factor < 1.0:
            raise ValueError("backtrack_factor must lie in (0, 1)")
        if self.armijo_c <= 0:
            raise ValueError("armijo_c must be positive")


@dataclass
class AscentTrace:
    """Accepted iterates (mu, g, ‖g'‖) of one gradient-ascent run."""

    mus: np.ndarray
    g_values: np.ndarray
    grad_norms: np.ndarray
    converged: bool
    restarts: int
    config: AscentConfig = field(repr=False)

    @property
    def mu(self):
        return self.mus[-1]

    @property
    def iterations(self):
        return self.mus.shape[0] - 1


def _mf_direction(stats, d):
    d = as_band_vector(d, stats.bands, "target")
    delta = d - stats.m
    if np.linalg.norm(delta) <= 1e-12 * (1.0 + np.linalg.norm(d)):
        raise DegenerateTarget("target equals the scene mean")
    return d, delta, stats.solve_covariance(delta)


def plateau_value(stats, d):
    """Common objective value on the hyperplane: (d-m)ᵀK⁻¹(d-m) + 1."""
    _, delta, u = _mf_direction(stats, d)
    return float(delta @ u) + 1.0


def basic_equation_residual(stats, d, mu):
    """Signed defect (d-m)ᵀK⁻¹(m-mu) - 1; zero exactly on the hyperplane."""
    d = as_band_vector(d, stats.bands, "target")
    mu = as_band_vector(mu, stats.bands, "mu")
    u = stats.solve_covariance(d - stats.m)
    return float(u @ (stats.m - mu)) - 1.0


def hyperplane_basis(u):
    """Orthonormal basis of {z : uᵀz = 0} as an (L, L-1) matrix.

    Columns 2..L of the Householder reflection taking u/‖u‖ to ±e₁;
    deterministic in u, which keeps sampled solutions reproducible.
    """
    u = np.asarray(u, dtype=np.float64).reshape(-1)
    nb = u.shape[0]
    q = u / np.linalg.norm(u)
    v = q.copy()
    v[0] += 1.0 if q[0] >= 0 else -1.0
    h = np.eye(nb) - (2.0 / (v @ v)) * np.outer(v, v)
    return h[:, 1:]


def solve_basic_equation(stats, d, kind="minimal_shift", tangent=None):
    """A closed-form origin on the hyperplane (d-m)ᵀK⁻¹(m-mu) = 1.

    kind "minimal_shift" gives the smallest-norm shift from the mean,
    "along_target_line" the solution on the line through m and d, and
    "sampled" minimal_shift plus an (L-1)-vector of tangent coordinates.
    """
    d, delta, u = _mf_direction(stats, d)
    if kind == "minimal_shift":
        mu = stats.m - u / (u @ u)
    elif kind == "along_target_line":
        mu = stats.m - delta / float(delta @ u)
    elif kind == "sampled":
        mu = stats.m - u / (u @ u)
        if tangent is not None:
            tangent = np.asarray(tangent, dtype=np.float64).reshape(-1)
            if tangent.shape[0] != stats.bands - 1:
                raise DimensionMismatch(
                    f"tangent needs {stats.bands - 1} coordinates")
            mu = mu + hyperplane_basis(u) @ tangent
    else:
        raise ValueError(f"unknown solution kind {kind!r}")
    residual = abs(float(u @ (stats.m - mu)) - 1.0)
    if residual > SOLUTION_RESIDUAL_TOL:
        raise PreconditionFailed(
            f"constructed solution misses the hyperplane (residual {residual:.3e}); "
            "statistics too ill-conditioned or tangent too large")
    return BasicEquationSolution(mu_star=mu, residual=residual, kind=kind)


def _on_plateau(stats, u, mu, g, plateau):
    residual = abs(float(u @ (stats.m - mu)) - 1.0)
    return (residual <= CONVERGED_RESIDUAL_TOL
            and abs(g - plateau) <= CONVERGED_PLATEAU_RTOL * abs(plateau))


def gradient_ascent(stats, d, mu0, config=None):
    """Maximize g by steepest ascent with warm-started Armijo backtracking.

    Accepted steps never decrease g. Convergence requires the gradient test
    ‖g'‖ ≤ grad_tol·(1+|g|) *and* hyperplane membership; a small-gradient
    point off the plateau (the mu = d minimum) triggers one restart from the
    reflection 2m - mu, after which the trace reports converged=False.
    Within 0.1% of the plateau value, up to three steps pick their length by
    the 1-D residual solve along the gradient direction (see module notes)
    instead of backtracking.
    """
    config = config or AscentConfig()
    d = as_band_vector(d, stats.bands, "target")
    mu = as_band_vector(mu0, stats.bands, "mu0").copy()
    _, _, u = _mf_direction(stats, d)
    plateau = plateau_value(stats, d)

    g = g_value(stats, d, mu)
    grad = g_gradient(stats, d, mu)
    mus, gs, gns = [mu.copy()], [g], [float(np.linalg.norm(grad))]
    converged = False
    restarts = 0

    step_start = config.initial_step

    def record(new_mu, new_g):
        nonlocal mu, g, grad
        mu, g, grad = new_mu, new_g, g_gradient(stats, d, new_mu)
        mus.append(mu.copy())
        gs.append(g)
        gns.append(float(np.linalg.norm(grad)))

    def restart_from(point, g_current):
        nonlocal restarts, step_start
        candidate = 2.0 * stats.m - point
        g_new = g_value(stats, d, candidate)
        if g_new < g_current:
            return False
        restarts += 1
        step_start = config.initial_step
        record(candidate, g_new)
        return True

    polishes = 0

    def polish():
        # residual(mu + s·g') = residual(mu) - s·(u@g') is linear in s, so
        # one gradient-direction step lands on the hyperplane exactly
        nonlocal polishes
        if polishes >= 3 or abs(g - plateau) > 1e-3 * plateau:
            return False
        residual = float(u @ (stats.m - mu)) - 1.0
        slope = float(u @ grad)
        if abs(residual) <= 1e-12 or slope == 0.0:
            return False
        candidate = mu + (residual / slope) * grad
        g_new = g_value(stats, d, candidate)
        if g_new < g:
            return False
        polishes += 1
        record(candidate, g_new)
        return True

    it = 0
    while it < config.max_iters:
        grad_norm = float(np.linalg.norm(grad))
        if grad_norm <= config.grad_tol * (1.0 + abs(g)):
            if _on_plateau(stats, u, mu, g, plateau):
                converged = True
                break
            if polish():
                it += 1
                continue
            if restarts == 0 and restart_from(mu, g):
                it += 1
                continue
            break
        if polish():
            # in the terminal basin, jump straight onto the hyperplane
            it += 1
            continue
        if it == config.max_iters // 2 and g < 0.5 * plateau and restarts == 0:
            if restart_from(mu, g):
                it += 1
                continue
        # warm-started backtracking: begin at the last accepted step grown
        # by 1/backtrack_factor so the step scale tracks the local curvature
        step = step_start
        accepted = False
        while step > 1e-20:
            trial = mu + step * grad
            g_trial = g_value(stats, d, trial)
            if g_trial >= g + config.armijo_c * step * grad_norm * grad_norm:
                accepted = True
                break
            step *= config.backtrack_factor
        if accepted:
            step_start = min(step / config.backtrack_factor, 2.0 ** 50)
            record(trial, g_trial)
            it += 1
            continue
        # line search found no acceptable increase (numerical floor of g);
        # the terminal 1-D solve may still certify the iterate
        if polish():
            it += 1
            continue
        break

    if not converged and _on_plateau(stats, u, mu, g, plateau) \
            and float(np.linalg.norm(grad)) <= config.grad_tol * (1.0 + abs(g)):
        converged = True  # budget ended exactly on a certified iterate

    return AscentTrace(
        mus=np.asarray(mus), g_values=np.asarray(gs),
        grad_norms=np.asarray(gns), converged=converged,
        restarts=restarts, config=config,
    )


def g_surface_grid(stats, d, mu1_range, mu2_range, resolution=(41, 41)):
    """Tabulate g over a 2-band origin grid as rows (mu1, mu2, g).

    Rows iterate mu1 outer, mu2 inner; endpoints are included.
    """
    if stats.bands != 2:
        raise DimensionMismatch("g surface grids are defined for 2-band scenes")
    d = as_band_vector(d, 2, "target")
    n1, n2 = int(resolution[0]), int(resolution[1])
    if n1 < 2 or n2 < 2:
        raise ValueError("grid resolution must be at least 2 per axis")
    mu1 = np.linspace(float(mu1_range[0]), float(mu1_range[1]), n1)
    mu2 = np.linspace(float(mu2_range[0]), float(mu2_range[1]), n2)
    g1, g2 = np.meshgrid(mu1, mu2, indexing="ij")
    mu = np.column_stack([g1.ravel(), g2.ravel()])

    k_inv = stats.solve_covariance(np.eye(2))
    v = d - mu
    delta = stats.m - mu
    x = v @ k_inv
    a = np.einsum("ij,ij->i", v, x)
    b = np.einsum("ij,ij->i", delta, x)
    t = np.einsum("ij,ij->i", delta, delta @ k_inv)
    g = np.maximum(a - b * b / (1.0 + t), 0.0)
    return np.column_stack([mu, g])


def hyperplane_line(stats, d):
    """Point and unit direction of the 2-band hyperplane, for overlays."""
    if stats.bands != 2:
        raise DimensionMismatch("the hyperplane is a plottable line only for 2 bands")
    _, _, u = _mf_direction(stats, d)
    point = solve_basic_equation(stats, d, "minimal_shift").mu_star
    direction = np.array([-u[1], u[0]]) / np.linalg.norm(u)
    return point, direction
