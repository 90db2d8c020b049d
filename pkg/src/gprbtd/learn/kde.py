"""Prototype summarization of non-target features and the exponential-kernel
density score used to pick training depths for target alarms."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import DataError

__all__ = ["PrototypeSet", "summarize_prototypes", "kde_score"]


@dataclass(frozen=True)
class PrototypeSet:
    prototypes: np.ndarray  # (k, d)
    beta: float             # resolution parameter, > 0


def _kmeans_pp_init(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    centers = [X[rng.integers(X.shape[0])]]
    d2 = ((X - centers[0]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0:
            centers.append(X[rng.integers(X.shape[0])])
            continue
        pick = rng.choice(X.shape[0], p=d2 / total)
        centers.append(X[pick])
        d2 = np.minimum(d2, ((X - centers[-1]) ** 2).sum(axis=1))
    return np.array(centers)


def summarize_prototypes(negatives, k: int, seed: int = 0, n_iter: int = 50) -> PrototypeSet:
    """k-means centroids of the non-target features (k-means++ seeding,
    fixed iteration count).  beta = 1 / (2 m^2) with m the median pairwise
    centroid distance."""
    X = np.asarray(negatives, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise DataError("negatives must be a non-empty (n, d) array")
    if not 1 <= k <= X.shape[0]:
        raise DataError(f"k must lie in [1, {X.shape[0]}], got {k}")
    rng = np.random.default_rng(seed)
    centers = _kmeans_pp_init(X, k, rng)
    for _ in range(n_iter):
        d2 = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        assign = d2.argmin(axis=1)
        new = centers.copy()
        for c in range(k):
            member = assign == c
            if member.any():
                new[c] = X[member].mean(axis=0)
            else:  # re-seed an empty cluster deterministically
                new[c] = X[int(d2.min(axis=1).argmax())]
        if np.array_equal(new, centers):
            break
        centers = new

    if k >= 2:
        iu = np.triu_indices(k, 1)
        dists = np.sqrt(((centers[iu[0]] - centers[iu[1]]) ** 2).sum(axis=1))
        m = float(np.median(dists))
    else:
        m = 0.0
    if m <= 0:
        warnings.warn("degenerate prototype spread; using unit resolution")
        m = 1.0
    return PrototypeSet(centers, beta=1.0 / (2.0 * m * m))


def kde_score(f, p: PrototypeSet) -> float:
    """(1/k) sum_j exp(-beta * ||f - p_j||); in (0, 1], 1 when f sits on the
    lone prototype."""
    f = np.asarray(f, dtype=np.float64).ravel()
    if f.size != p.prototypes.shape[1]:
        raise DataError(f"feature dim {f.size} != prototype dim {p.prototypes.shape[1]}")
    dist = np.sqrt(((p.prototypes - f) ** 2).sum(axis=1))
    return float(np.exp(-p.beta * dist).mean())
