"""Basic-equation solutions, gradient ascent, objective surface grids."""

import numpy as np
import pytest

from conftest import dense_shifted_inverse, make_scene
from tdtk import (AscentConfig, DegenerateTarget, DimensionMismatch, Scene,
                  basic_equation_residual, ce_detector, compute_stats,
                  g_surface_grid, gradient_ascent, hyperplane_basis, mf,
                  plateau_value, solve_basic_equation)


def test_residual_at_mean_is_minus_one():
    stats = compute_stats(make_scene(np.random.default_rng(0), 200, 3))
    d = stats.m + np.array([1.0, 0.5, -0.25])
    assert abs(basic_equation_residual(stats, d, stats.m) + 1.0) < 1e-12


def test_residual_zero_along_target_line():
    rng = np.random.default_rng(1)
    stats = compute_stats(make_scene(rng, 200, 3))
    d = stats.m + rng.normal(size=3)
    delta = d - stats.m
    gmf = float(delta @ np.linalg.inv(stats.K) @ delta)
    mu = stats.m - delta / gmf
    assert abs(basic_equation_residual(stats, d, mu)) < 1e-12


def test_residual_at_target():
    rng = np.random.default_rng(2)
    stats = compute_stats(make_scene(rng, 200, 3))
    d = stats.m + rng.normal(size=3)
    delta = d - stats.m
    gmf = float(delta @ np.linalg.inv(stats.K) @ delta)
    got = basic_equation_residual(stats, d, d)
    assert abs(got - (-gmf - 1.0)) < 1e-9
    assert got < -1.0


def test_closed_forms_on_identity_scene():
    s = np.sqrt(2.0)
    scene = Scene(width=4, height=1,
                  values=np.array([[s, 0.0], [-s, 0.0], [0.0, s], [0.0, -s]]))
    stats = compute_stats(scene)  # m = 0, K = I
    d = np.array([1.0, 0.0])
    minimal = solve_basic_equation(stats, d, "minimal_shift").mu_star
    along = solve_basic_equation(stats, d, "along_target_line").mu_star
    np.testing.assert_allclose(minimal, [-1.0, 0.0], atol=1e-12)
    np.testing.assert_allclose(along, [-1.0, 0.0], atol=1e-12)


def test_degenerate_target_rejected():
    stats = compute_stats(make_scene(np.random.default_rng(3), 100, 3))
    with pytest.raises(DegenerateTarget):
        solve_basic_equation(stats, stats.m.copy(), "minimal_shift")


def test_tangent_basis_spans_solution_set():
    rng = np.random.default_rng(4)
    bands = 8
    scene = make_scene(rng, 400, bands)
    stats = compute_stats(scene)
    d = stats.m + rng.normal(size=bands)
    u = stats.solve_covariance(d - stats.m)
    basis = hyperplane_basis(u)
    assert basis.shape == (bands, bands - 1)
    np.testing.assert_allclose(basis.T @ basis, np.eye(bands - 1), atol=1e-12)
    np.testing.assert_allclose(basis.T @ u, 0.0, atol=1e-12 * np.linalg.norm(u))
    for j in range(bands - 1):
        tangent = np.zeros(bands - 1)
        tangent[j] = 1.0
        sol = solve_basic_equation(stats, d, "sampled", tangent=tangent)
        assert sol.residual <= 1e-12


def test_sampled_solutions_all_give_one_detector():
    rng = np.random.default_rng(5)
    scene = make_scene(rng, 500, 4)
    stats = compute_stats(scene)
    d = stats.m + rng.normal(size=4)
    reference = ce_detector(
        stats, d, solve_basic_equation(stats, d, "minimal_shift").mu_star).w
    scale = max(1.0, np.abs(reference).max())
    for _ in range(50):
        sol = solve_basic_equation(stats, d, "sampled", tangent=rng.normal(size=3))
        w = ce_detector(stats, d, sol.mu_star).w
        assert np.abs(w - reference).max() <= 1e-9 * scale


def test_solution_kind_validation():
    stats = compute_stats(make_scene(np.random.default_rng(6), 100, 3))
    d = stats.m + np.ones(3)
    with pytest.raises(ValueError):
        solve_basic_equation(stats, d, "nonsense")
    with pytest.raises(DimensionMismatch):
        solve_basic_equation(stats, d, "sampled", tangent=np.ones(5))


def test_ascent_config_validation():
    with pytest.raises(ValueError):
        AscentConfig(max_iters=0)
    with pytest.raises(ValueError):
        AscentConfig(backtrack_factor=1.5)
    with pytest.raises(ValueError):
        AscentConfig(armijo_c=-1.0)


def test_ascent_converges_from_standard_starts(default_synth):
    scene, _, d = default_synth
    stats = compute_stats(scene)
    plateau = plateau_value(stats, d)
    rng = np.random.default_rng(7)
    for mu0 in (np.zeros(3), stats.m, rng.normal(size=3)):
        trace = gradient_ascent(stats, d, mu0)
        assert trace.converged
        assert abs(basic_equation_residual(stats, d, trace.mu)) <= 1e-6
        assert abs(trace.g_values[-1] - plateau) <= 1e-6 * plateau
        assert np.all(np.diff(trace.g_values) >= 0.0)


def test_ascent_from_mean_converges_even_though_mean_is_not_a_solution(default_synth):
    scene, _, d = default_synth
    stats = compute_stats(scene)
    assert abs(basic_equation_residual(stats, d, stats.m) + 1.0) < 1e-12
    trace = gradient_ascent(stats, d, stats.m)
    assert trace.converged


def test_ascent_from_target_never_claims_false_convergence(default_synth):
    scene, _, d = default_synth
    stats = compute_stats(scene)
    trace = gradient_ascent(stats, d, d.copy())
    if trace.converged:
        assert abs(basic_equation_residual(stats, d, trace.mu)) <= 1e-6
        assert trace.restarts >= 1
    assert np.all(np.diff(trace.g_values) >= 0.0)


def test_ascent_budget_exhaustion_reported():
    rng = np.random.default_rng(8)
    scene = make_scene(rng, 300, 3)
    stats = compute_stats(scene)
    d = stats.m + rng.normal(size=3)
    trace = gradient_ascent(stats, d, np.zeros(3), AscentConfig(max_iters=2))
    assert not trace.converged
    assert trace.iterations <= 3  # budget plus at most the restart record


def test_ascent_matches_closed_form_detector():
    rng = np.random.default_rng(9)
    for bands in (2, 3, 8):
        scene = make_scene(rng, 60 * bands, bands)
        stats = compute_stats(scene)
        d = stats.m + rng.normal(size=bands)
        trace = gradient_ascent(stats, d, np.zeros(bands))
        assert trace.converged
        wa = ce_detector(stats, d, trace.mu).w
        wc = ce_detector(
            stats, d, solve_basic_equation(stats, d, "minimal_shift").mu_star).w
        cosine = wa @ wc / (np.linalg.norm(wa) * np.linalg.norm(wc))
        assert 1.0 - cosine <= 1e-6


def test_plateau_equals_mf_quadratic_plus_one():
    rng = np.random.default_rng(10)
    scene = make_scene(rng, 300, 5)
    stats = compute_stats(scene)
    d = stats.m + rng.normal(size=5)
    expect = 1.0 / mf(stats, d).energy + 1.0
    assert abs(plateau_value(stats, d) - expect) < 1e-9 * expect


def test_surface_requires_two_bands():
    stats = compute_stats(make_scene(np.random.default_rng(11), 100, 3))
    with pytest.raises(DimensionMismatch):
        g_surface_grid(stats, np.ones(3), (-1, 1), (-1, 1))


def test_surface_minimum_at_target_cell():
    rng = np.random.default_rng(12)
    scene = make_scene(rng, 300, 2)
    stats = compute_stats(scene)
    d = stats.m + rng.normal(size=2)
    grid = g_surface_grid(stats, d, (d[0] - 2, d[0] + 2), (d[1] - 2, d[1] + 2),
                          resolution=(41, 41))
    # odd resolution over a symmetric range puts d on the middle grid node
    # up to linspace rounding, so the minimum there is zero to ~1e-32
    at_min = grid[np.argmin(grid[:, 2])]
    np.testing.assert_allclose(at_min[:2], d, atol=1e-12)
    assert at_min[2] <= 1e-20


def test_surface_plateau_near_hyperplane(default_stats=None):
    rng = np.random.default_rng(13)
    scene = make_scene(rng, 400, 2)
    stats = compute_stats(scene)
    d = stats.m + rng.normal(size=2)
    mu_star = solve_basic_equation(stats, d, "minimal_shift").mu_star
    plateau = plateau_value(stats, d)
    span = 0.02
    grid = g_surface_grid(stats, d,
                          (mu_star[0] - span, mu_star[0] + span),
                          (mu_star[1] - span, mu_star[1] + span),
                          resolution=(21, 21))
    assert grid[:, 2].max() <= plateau * (1 + 1e-12)
    assert grid[:, 2].max() >= plateau * (1 - 1e-3)


def test_surface_matches_bruteforce_on_tiny_scene():
    values = np.array([[0.0, 0.0], [1.0, 0.25], [0.25, 1.0]])
    scene = Scene(width=3, height=1, values=values)
    stats = compute_stats(scene)
    d = np.array([2.0, 2.0])
    grid = g_surface_grid(stats, d, (-1.0, 1.0), (-1.0, 1.0), resolution=(3, 3))
    assert grid.shape == (9, 3)
    for mu1, mu2, g in grid:
        mu = np.array([mu1, mu2])
        v = d - mu
        r_inv = dense_shifted_inverse(stats, mu)
        w = r_inv @ v / float(v @ r_inv @ v)
        energy = np.mean([(w @ (row - mu)) ** 2 for row in values])
        assert abs(g - 1.0 / energy) < 1e-9 * max(1.0, abs(g))
