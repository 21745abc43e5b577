"""Detection maps and detector scoring: energy, R², ROC/AUC.

The ROC convention is fixed as: sweep unique score values as thresholds in
descending order, group ties (no intra-tie ordering), trapezoidal AUC. The
area is accumulated from integer tie-group counts, numerator/(2·P·N), which
is algebraically the trapezoid rule and exactly the probability that a
target pixel outranks a background pixel with ties counted half.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DegenerateMask, DimensionMismatch, ZeroVariance

__all__ = [
    "DetectionMap",
    "GroundTruthMask",
    "RocCurve",
    "detect",
    "output_energy",
    "r_squared",
    "roc",
]


@dataclass(frozen=True)
class DetectionMap:
    """Per-pixel filter outputs y_i = w·(r_i - origin) for one detector."""

    scores: np.ndarray
    width: int
    height: int
    method: str


@dataclass(frozen=True)
class GroundTruthMask:
    """Boolean target mask over the same pixel grid as its scene."""

    values: np.ndarray
    width: int
    height: int


@dataclass(frozen=True)
class RocCurve:
    """Descending-threshold ROC points and trapezoidal AUC.

    thresholds[0] is +inf for the (0,0) anchor; fpr and tpr are
    non-decreasing and end at (1,1).
    """

    thresholds: np.ndarray
    fpr: np.ndarray
    tpr: np.ndarray
    auc: float


def _scores_of(obj):
    if isinstance(obj, DetectionMap):
        return obj.scores
    return np.asarray(obj, dtype=np.float64).reshape(-1)


def detect(scene, detector):
    """Apply a detector to a scene; a pixel equal to d scores exactly 1."""
    if detector.w.shape[0] != scene.bands:
        raise DimensionMismatch(
            f"detector has {detector.w.shape[0]} bands, scene has {scene.bands}")
    scores = _kernels.detection_scores(scene.values, detector.w, detector.origin)
    return DetectionMap(scores=scores, width=scene.width, height=scene.height,
                        method=detector.method)


def output_energy(dmap):
    """Average squared filter output, (1/N)·Σ y_i²."""
    scores = _scores_of(dmap)
    return float(scores @ scores) / scores.shape[0]


def r_squared(map_a, map_b):
    """Squared Pearson correlation of two maps (two-pass, float64)."""
    a = _scores_of(map_a)
    b = _scores_of(map_b)
    if a.shape[0] != b.shape[0]:
        raise DimensionMismatch("maps have different pixel counts")
    a = a - a.mean()
    b = b - b.mean()
    va = float(a @ a)
    vb = float(b @ b)
    if va == 0.0 or vb == 0.0:
        raise ZeroVariance("constant map has no correlation")
    r = float(a @ b) / np.sqrt(va * vb)
    return min(r * r, 1.0)


def roc(dmap, mask):
    """ROC curve of a detection map against a ground-truth mask."""
    scores = _scores_of(dmap)
    labels = mask.values if isinstance(mask, GroundTruthMask) else np.asarray(mask)
    labels = labels.astype(bool).reshape(-1)
    if labels.shape[0] != scores.shape[0]:
        raise DimensionMismatch("mask and map have different pixel counts")
    n_pos = int(labels.sum())
    n_neg = labels.shape[0] - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DegenerateMask("mask needs at least one target and one background pixel")

    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    y = labels[order]
    tp = np.cumsum(y, dtype=np.int64)
    fp = np.cumsum(~y, dtype=np.int64)
    # last index of each tie group
    ends = np.nonzero(np.append(s[1:] != s[:-1], True))[0]
    tp_k = np.concatenate([[0], tp[ends]])
    fp_k = np.concatenate([[0], fp[ends]])

    numerator = int(np.sum((fp_k[1:] - fp_k[:-1]) * (tp_k[1:] + tp_k[:-1])))
    auc = numerator / (2 * n_pos * n_neg)
    thresholds = np.concatenate([[np.inf], s[ends]])
    return RocCurve(thresholds=thresholds,
                    fpr=fp_k / n_neg, tpr=tp_k / n_pos, auc=auc)
