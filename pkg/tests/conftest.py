import numpy as np
import pytest

from tdtk import Scene, SynthConfig, compute_stats, generate


def make_scene(rng, n_pixels, bands, mean=None, width=None):
    """Well-conditioned random scene: colored gaussians about a random mean."""
    a = rng.normal(size=(bands, bands))
    cov = a @ a.T + 0.5 * np.eye(bands)
    if mean is None:
        mean = rng.uniform(-2.0, 2.0, bands)
    z = rng.normal(size=(n_pixels, bands))
    x = np.asarray(mean) + z @ np.linalg.cholesky(cov).T
    width = width or n_pixels
    return Scene(width=width, height=n_pixels // width, values=x)


def moments_bruteforce(x):
    """Per-pixel loop oracle for mean/covariance/correlation (divisor N)."""
    n, bands = x.shape
    m = np.zeros(bands)
    for row in x:
        m += row
    m /= n
    k = np.zeros((bands, bands))
    r = np.zeros((bands, bands))
    for row in x:
        r += np.outer(row, row)
        k += np.outer(row - m, row - m)
    return m, k / n, r / n


def energy_bruteforce(x, w, origin):
    """Mean squared filter output by explicit pixel loop."""
    total = 0.0
    for row in x:
        y = float(w @ (row - origin))
        total += y * y
    return total / x.shape[0]


def dense_shifted_inverse(stats, mu):
    """Oracle: invert K + (m-mu)(m-mu)ᵀ densely (plus the ridge)."""
    delta = stats.m - mu
    r_mu = stats.K + np.outer(delta, delta)
    r_mu = r_mu + stats.ridge * np.eye(stats.bands)
    return np.linalg.inv(r_mu)


def pairwise_auc(scores, labels):
    """Oracle: probability a target outranks a background, ties half."""
    pos = [s for s, t in zip(scores, labels) if t]
    neg = [s for s, t in zip(scores, labels) if not t]
    numerator = 0
    for p in pos:
        for q in neg:
            numerator += 2 if p > q else (1 if p == q else 0)
    return numerator / (2 * len(pos) * len(neg))


@pytest.fixture(scope="session")
def default_synth():
    return generate(SynthConfig())


@pytest.fixture(scope="session")
def default_stats(default_synth):
    scene, _, _ = default_synth
    return compute_stats(scene)
