"""Synthetic labeled sphere data with controllable pair dependence.

Two pair constructions share the same class-conditional distribution
(normalize(center + spread * gaussian) on the unit sphere):

* :func:`ci_pairs` draws the two sides of every positive pair independently
  from the class conditional, so x and x+ are conditionally independent given
  the label by construction;
* :func:`dependent_pairs` makes the positive a tiny perturbation of its
  anchor, the strongest possible violation of conditional independence.
"""

from __future__ import annotations

import numpy as np

from .data import EmbeddingSet, LabelSet, PositivePairs


def class_centers(k: int, m: int, seed: int = 0) -> np.ndarray:
    """k well-separated unit vectors in R^m (orthonormalized when k <= m)."""
    if k < 1 or m < 2:
        raise ValueError("need k >= 1 and m >= 2")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((m, k))
    if k <= m:
        q, _ = np.linalg.qr(g)
        return np.ascontiguousarray(q[:, :k].T)
    return g.T / np.linalg.norm(g.T, axis=1, keepdims=True)


def balanced_labels(n: int, k: int, rng: np.random.Generator) -> LabelSet:
    labels = np.tile(np.arange(k), n // k + 1)[:n]
    rng.shuffle(labels)
    return LabelSet(labels, k=k)


def _class_conditional(centers: np.ndarray, labels: np.ndarray, spread: float, rng) -> np.ndarray:
    x = centers[labels] + spread * rng.standard_normal((labels.shape[0], centers.shape[1]))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def ci_pairs(n: int, k: int, m: int, spread: float = 0.3, seed: int = 0) -> PositivePairs:
    """Positive pairs with exact conditional independence given the label."""
    if n < 2 * k:
        raise ValueError("need at least 2 pairs per class")
    if spread < 0:
        raise ValueError("spread must be >= 0")
    rng = np.random.default_rng(seed)
    centers = class_centers(k, m, seed=seed)
    labels = balanced_labels(n, k, rng)
    left = _class_conditional(centers, labels.labels, spread, rng)
    right = _class_conditional(centers, labels.labels, spread, rng)
    return PositivePairs(
        EmbeddingSet(left, normalized=True),
        EmbeddingSet(right, normalized=True),
        labels,
        labels,
    )


def dependent_pairs(
    n: int, k: int, m: int, spread: float = 0.5, perturb: float = 0.02, seed: int = 0
) -> PositivePairs:
    """Positive pairs that are tight perturbations of their anchors.

    The wide class conditional keeps each class center norm well below 1, so
    the conditional-independence ratio of these pairs sits clearly above 1.
    """
    if n < 2 * k:
        raise ValueError("need at least 2 pairs per class")
    if spread < 0 or perturb < 0:
        raise ValueError("spread and perturb must be >= 0")
    rng = np.random.default_rng(seed)
    centers = class_centers(k, m, seed=seed)
    labels = balanced_labels(n, k, rng)
    left = _class_conditional(centers, labels.labels, spread, rng)
    right = left + perturb * rng.standard_normal(left.shape)
    right /= np.linalg.norm(right, axis=1, keepdims=True)
    return PositivePairs(
        EmbeddingSet(left, normalized=True),
        EmbeddingSet(right, normalized=True),
        labels,
        labels,
    )
