"""Synthetic scene generation: shapes, determinism, sampling sanity."""

import numpy as np
import pytest

from tdtk import ConfigInvalid, SynthConfig, cem, compute_stats, detect, generate
from tdtk._kernels import available_backends


def test_default_config_matches_reference_shape():
    scene, mask, d = generate(SynthConfig())
    assert (scene.width, scene.height, scene.bands) == (50, 50, 3)
    assert scene.n_pixels == 2500
    assert int(mask.values.sum()) == 25
    np.testing.assert_array_equal(d, [0.0, 0.0, 1.0])
    # the centered 5x5 block starts at (22, 22)
    assert mask.values.reshape(50, 50)[22:27, 22:27].all()
    assert mask.values.sum() == 25


def test_same_seed_bitwise_identical_different_seed_not():
    a1, m1, _ = generate(SynthConfig(seed=7))
    a2, m2, _ = generate(SynthConfig(seed=7))
    b, _, _ = generate(SynthConfig(seed=8))
    assert np.array_equal(a1.values, a2.values)
    assert np.array_equal(m1.values, m2.values)
    assert not np.array_equal(a1.values, b.values)


def test_backends_generate_identical_scenes():
    impls = available_backends()
    if len(impls) < 2:
        pytest.skip("only one kernel backend available")
    import tdtk._kernels as kernels
    config = SynthConfig(seed=123)
    outputs = {}
    original = kernels._impl
    try:
        for name, impl in impls.items():
            for fn in ("normal_stream", "color_pixels"):
                setattr(kernels, fn, getattr(impl, fn))
            outputs[name] = generate(config)[0].values
    finally:
        for fn in ("normal_stream", "color_pixels"):
            setattr(kernels, fn, getattr(original, fn))
    a, b = outputs.values()
    assert np.array_equal(a, b)


def test_near_pure_target_block_scores_one():
    config = SynthConfig(seed=5, tgt_cov=1e-12 * np.eye(3))
    scene, mask, d = generate(config)
    assert np.abs(scene.values[mask.values] - d).max() < 1e-5
    stats = compute_stats(scene)
    scores = detect(scene, cem(stats, d)).scores
    assert np.abs(scores[mask.values] - 1.0).max() < 1e-4


def test_explicit_position_and_bounds():
    scene, mask, _ = generate(SynthConfig(tgt_position=(0, 0)))
    assert mask.values.reshape(50, 50)[0:5, 0:5].all()
    with pytest.raises(ConfigInvalid):
        generate(SynthConfig(tgt_position=(48, 0)))
    with pytest.raises(ConfigInvalid):
        generate(SynthConfig(tgt_size=(60, 1)))


def test_invalid_covariance_rejected():
    bad = np.array([[1.0, 2.0, 0.0], [2.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    with pytest.raises(ConfigInvalid):
        generate(SynthConfig(bg_cov=bad))  # indefinite
    with pytest.raises(ConfigInvalid):
        generate(SynthConfig(bg_mean=np.zeros(2)))  # wrong length
    with pytest.raises(ConfigInvalid):
        generate(SynthConfig(seed=-1))


def test_background_sample_mean_converges():
    # 10^6 background samples; the block overwrite is dodged by a tiny target
    config = SynthConfig(seed=11, bg_size=(1000, 1000), tgt_size=(1, 1),
                         bg_mean=np.array([0.5, -1.0, 2.0]))
    scene, mask, _ = generate(config)
    bg = scene.values[~mask.values]
    sigma = np.sqrt(np.diag(np.asarray(config.bg_cov)))
    bound = 5.0 * sigma / np.sqrt(bg.shape[0])
    assert np.all(np.abs(bg.mean(axis=0) - config.bg_mean) < bound)


def test_covariance_coloring_reaches_requested_covariance():
    cov = np.array([[2.0, 0.8, 0.1], [0.8, 1.0, -0.2], [0.1, -0.2, 0.5]])
    config = SynthConfig(seed=3, bg_size=(500, 500), tgt_size=(1, 1), bg_cov=cov)
    scene, mask, _ = generate(config)
    bg = scene.values[~mask.values]
    sample_cov = np.cov(bg.T)
    assert np.abs(sample_cov - cov).max() < 0.05
