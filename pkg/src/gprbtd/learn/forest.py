"""Random forest of Gini-split decision trees, grown from bootstrap samples.

Trees are stored as flat node arrays (feature, threshold, children, leaf
value) so prediction can route whole batches with index arithmetic instead
of per-sample recursion.
"""

from __future__ import annotations

import sys
import warnings
from dataclasses import dataclass, field

import numpy as np

from ..errors import DataError

__all__ = ["DecisionTree", "ForestModel", "forest_train", "forest_decision", "grow_tree"]


@dataclass
class DecisionTree:
    feature: np.ndarray     # (n_nodes,) int, -1 for leaves
    threshold: np.ndarray   # (n_nodes,) float
    left: np.ndarray        # (n_nodes,) int child index
    right: np.ndarray       # (n_nodes,) int child index
    value: np.ndarray       # (n_nodes,) positive-class fraction at the node

    def predict(self, X: np.ndarray) -> np.ndarray:
        nodes = np.zeros(X.shape[0], dtype=np.intp)
        while True:
            feat = self.feature[nodes]
            active = feat >= 0
            if not active.any():
                return self.value[nodes]
            rows = np.nonzero(active)[0]
            go_left = X[rows, feat[rows]] <= self.threshold[nodes[rows]]
            nodes[rows] = np.where(go_left, self.left[nodes[rows]], self.right[nodes[rows]])


@dataclass
class ForestModel:
    trees: list[DecisionTree] = field(default_factory=list)
    n_features: int = 0
    constant: float | None = None  # set when training data had one class


def _best_split(X, y, features, min_leaf):
    """Best (gini, feature, threshold) over the candidate features, or None."""
    n = y.size
    best = None
    for f in features:
        order = np.argsort(X[:, f], kind="stable")
        xs, ys = X[order, f], y[order]
        # Splits between positions i-1 and i; both sides need min_leaf rows
        # and a strict value change.
        cut = np.arange(1, n)
        valid = (xs[1:] > xs[:-1]) & (cut >= min_leaf) & (n - cut >= min_leaf)
        if not valid.any():
            continue
        pos_left = np.cumsum(ys)[:-1]
        n_left = cut.astype(np.float64)
        n_right = n - n_left
        pos_right = ys.sum() - pos_left
        p_l, p_r = pos_left / n_left, pos_right / n_right
        gini = (
            n_left * (1.0 - p_l**2 - (1.0 - p_l) ** 2)
            + n_right * (1.0 - p_r**2 - (1.0 - p_r) ** 2)
        ) / n
        gini = np.where(valid, gini, np.inf)
        k = int(np.argmin(gini))
        if best is None or gini[k] < best[0]:
            best = (float(gini[k]), int(f), 0.5 * (xs[k] + xs[k + 1]))
    return best


def grow_tree(X, y, rng: np.random.Generator, max_features: int | None = None,
              min_leaf: int = 2) -> DecisionTree:
    """Grow one tree to purity (or until min_leaf forbids further splits)."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    d = X.shape[1]
    m = max_features if max_features is not None else max(1, int(round(np.sqrt(d))))
    m = min(m, d)

    feature, threshold, left, right, value = [], [], [], [], []

    def build(rows) -> int:
        idx = len(feature)
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        ys = y[rows]
        value.append(float(ys.mean()))
        if ys.size < 2 * min_leaf or ys.min() == ys.max():
            return idx
        cand = rng.choice(d, size=m, replace=False)
        split = _best_split(X[rows], ys, cand, min_leaf)
        if split is None:
            return idx
        _, f, thr = split
        go = X[rows, f] <= thr
        feature[idx], threshold[idx] = f, thr
        left[idx] = build(rows[go])
        right[idx] = build(rows[~go])
        return idx

    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 10_000))
    try:
        build(np.arange(y.size))
    finally:
        sys.setrecursionlimit(limit)
    return DecisionTree(
        np.array(feature, dtype=np.intp),
        np.array(threshold),
        np.array(left, dtype=np.intp),
        np.array(right, dtype=np.intp),
        np.array(value),
    )


def forest_train(X, y, n_trees: int = 100, seed: int = 0,
                 max_features: int | None = None, min_leaf: int = 2) -> ForestModel:
    """Bootstrap-trained forest; deterministic for a given seed."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    if X.ndim != 2 or X.shape[0] != y.size or y.size == 0:
        raise DataError(f"bad training shapes X{X.shape}, y{y.shape}")
    if not np.isfinite(X).all():
        raise DataError("training data contains non-finite values")
    y = (y > 0).astype(np.float64)
    if y.min() == y.max():
        warnings.warn("single-class training data; forest degenerates to a constant")
        return ForestModel([], X.shape[1], constant=float(y[0]))

    rng = np.random.default_rng(seed)
    trees = []
    for _ in range(n_trees):
        rows = rng.integers(0, y.size, y.size)
        trees.append(grow_tree(X[rows], y[rows], rng, max_features, min_leaf))
    return ForestModel(trees, X.shape[1])


def forest_decision(model: ForestModel, x) -> float | np.ndarray:
    """Mean over trees of the leaf positive-class fraction, in [0, 1]."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    rows = x[None, :] if single else x
    if rows.shape[1] != model.n_features:
        raise DataError(f"feature dim {rows.shape[1]} != model dim {model.n_features}")
    if model.constant is not None:
        out = np.full(rows.shape[0], model.constant)
    else:
        out = np.mean([t.predict(rows) for t in model.trees], axis=0)
    return float(out[0]) if single else out
