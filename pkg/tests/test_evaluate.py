"""Detection maps, energies, map correlation, ROC/AUC with tie handling."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import energy_bruteforce, make_scene, pairwise_auc
from tdtk import (DegenerateMask, DetectionMap, ZeroVariance, cem,
                  ce_detector, compute_stats, detect, mf, output_energy,
                  r_squared, roc, solve_basic_equation)


def test_detect_scores_target_and_origin_pixels():
    rng = np.random.default_rng(0)
    scene = make_scene(rng, 100, 3)
    stats = compute_stats(scene)
    d = stats.m + rng.normal(size=3)
    det = mf(stats, d)
    values = scene.values.copy()
    values[0] = d
    values[1] = det.origin
    from tdtk import Scene
    probed = Scene(width=100, height=1, values=values)
    scores = detect(probed, det).scores
    assert abs(scores[0] - 1.0) < 1e-12
    assert abs(scores[1]) < 1e-12


def test_detect_mean_square_equals_energy():
    rng = np.random.default_rng(1)
    scene = make_scene(rng, 200, 4)
    stats = compute_stats(scene)
    d = stats.m + rng.normal(size=4)
    for det in (cem(stats, d), mf(stats, d)):
        dmap = detect(scene, det)
        assert abs(np.mean(dmap.scores ** 2) - det.energy) < 1e-9


def test_output_energy_trivial():
    assert output_energy(np.zeros(5)) == 0.0
    assert output_energy(np.array([1.0, -1.0])) == 1.0


def test_cem_map_energy_equals_quadratic_form(default_synth):
    scene, _, d = default_synth
    stats = compute_stats(scene)
    dmap = detect(scene, cem(stats, d))
    oracle = 1.0 / float(d @ np.linalg.inv(stats.R) @ d)
    assert abs(output_energy(dmap) - oracle) < 1e-9
    brute = energy_bruteforce(scene.values, cem(stats, d).w, np.zeros(3))
    assert abs(output_energy(dmap) - brute) < 1e-9


def test_r_squared_affine_invariance_and_symmetry():
    rng = np.random.default_rng(2)
    a = rng.normal(size=500)
    assert abs(r_squared(a, 2.0 * a + 3.0) - 1.0) < 1e-12
    b = rng.normal(size=500)
    assert abs(r_squared(a, b) - r_squared(b, a)) < 1e-14
    assert abs(r_squared(a, b) - r_squared(-0.5 * a + 1.0, b)) < 1e-12


def test_r_squared_zero_variance():
    with pytest.raises(ZeroVariance):
        r_squared(np.ones(10), np.arange(10.0))


def test_mf_ce_maps_linearly_dependent(default_synth):
    scene, _, d = default_synth
    stats = compute_stats(scene)
    mu = solve_basic_equation(stats, d, "minimal_shift").mu_star
    map_mf = detect(scene, mf(stats, d))
    map_ce = detect(scene, ce_detector(stats, d, mu))
    map_cem = detect(scene, cem(stats, d))
    assert r_squared(map_mf, map_ce) >= 1.0 - 1e-9
    assert r_squared(map_cem, map_ce) < r_squared(map_mf, map_ce)


def test_roc_perfect_separation():
    scores = np.array([5.0, 4.0, 3.0, 1.0, 0.5, 0.2])
    labels = np.array([True, True, True, False, False, False])
    curve = roc(scores, labels)
    assert curve.auc == 1.0
    assert curve.fpr[0] == 0.0 and curve.tpr[0] == 0.0
    assert curve.fpr[-1] == 1.0 and curve.tpr[-1] == 1.0
    assert curve.thresholds[0] == np.inf


def test_roc_all_tied_is_chance():
    curve = roc(np.full(10, 2.5), np.array([True] * 4 + [False] * 6))
    assert curve.auc == 0.5
    assert len(curve.fpr) == 2  # one tie group plus the anchor


def test_roc_monotone_and_trapezoid_consistent():
    rng = np.random.default_rng(3)
    scores = rng.choice(np.linspace(0, 1, 7), size=200)
    labels = rng.random(200) < 0.3
    curve = roc(scores, labels)
    assert np.all(np.diff(curve.fpr) >= 0)
    assert np.all(np.diff(curve.tpr) >= 0)
    assert np.all(np.diff(curve.thresholds) < 0)
    assert abs(curve.auc - np.trapezoid(curve.tpr, curve.fpr)) < 1e-12


def test_roc_matches_pairwise_oracle_exactly():
    rng = np.random.default_rng(4)
    for trial in range(50):
        n = int(rng.integers(2, 65))
        scores = rng.choice(np.linspace(-1, 1, 5), size=n)
        labels = rng.random(n) < 0.5
        if labels.all() or not labels.any():
            continue
        assert roc(scores, labels).auc == pairwise_auc(scores, labels)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(-3, 3), st.booleans()),
                min_size=2, max_size=64))
def test_roc_pairwise_oracle_property(items):
    scores = np.array([float(s) for s, _ in items])
    labels = np.array([t for _, t in items])
    if labels.all() or not labels.any():
        return
    assert roc(scores, labels).auc == pairwise_auc(scores, labels)


def test_roc_degenerate_mask():
    with pytest.raises(DegenerateMask):
        roc(np.arange(4.0), np.zeros(4, dtype=bool))


def test_ranking_invariant_under_positive_rescaling():
    rng = np.random.default_rng(5)
    scores = rng.normal(size=300)
    labels = rng.random(300) < 0.2
    base = roc(scores, labels)
    scaled = roc(4.0 * scores, labels)
    assert scaled.auc == base.auc
    assert np.array_equal(scaled.fpr, base.fpr)
    assert np.array_equal(scaled.tpr, base.tpr)


def test_shuffled_mask_scores_at_chance(default_synth):
    scene, mask, d = default_synth
    stats = compute_stats(scene)
    rng = np.random.default_rng(6)
    shuffled = mask.values[rng.permutation(mask.values.shape[0])]
    auc = roc(detect(scene, cem(stats, d)), shuffled).auc
    assert abs(auc - 0.5) < 0.1


def test_equivalent_detectors_have_identical_roc(default_synth):
    scene, mask, d = default_synth
    stats = compute_stats(scene)
    mu = solve_basic_equation(stats, d, "minimal_shift").mu_star
    curve_mf = roc(detect(scene, mf(stats, d)), mask)
    curve_ce = roc(detect(scene, ce_detector(stats, d, mu)), mask)
    np.testing.assert_allclose(curve_mf.fpr, curve_ce.fpr, atol=1e-12)
    np.testing.assert_allclose(curve_mf.tpr, curve_ce.tpr, atol=1e-12)
    assert abs(curve_mf.auc - curve_ce.auc) < 1e-12


def test_detection_map_metadata(default_synth):
    scene, _, d = default_synth
    stats = compute_stats(scene)
    dmap = detect(scene, cem(stats, d))
    assert isinstance(dmap, DetectionMap)
    assert dmap.method == "CEM"
    assert dmap.scores.shape == (scene.n_pixels,)
    assert (dmap.width, dmap.height) == (scene.width, scene.height)
