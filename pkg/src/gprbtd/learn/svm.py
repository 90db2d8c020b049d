"""Soft-margin RBF-kernel SVM trained by pairwise dual coordinate steps.

The solver repeatedly picks the maximal-violating pair (most-violated KKT
pair), solves the two-variable subproblem analytically, and stops when the
violation gap drops below tol.  Selection is by numpy argmax/argmin, so
training is deterministic for a given dataset.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import DataError

__all__ = ["SvmModel", "svm_train", "svm_decision", "rbf_kernel", "svm_dual_objective"]


@dataclass
class SvmModel:
    support_vectors: np.ndarray  # (n_sv, d)
    dual_coefs: np.ndarray       # (n_sv,), alpha_i * y_i, |coef| <= C
    bias: float
    gamma: float
    C: float


def rbf_kernel(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    """exp(-gamma * ||a - b||^2) for every row pair."""
    sq = (
        (A * A).sum(axis=1)[:, None]
        + (B * B).sum(axis=1)[None, :]
        - 2.0 * A @ B.T
    )
    return np.exp(-gamma * np.maximum(sq, 0.0))


def _validate_training_data(X, y):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    if X.ndim != 2 or X.shape[0] != y.size:
        raise DataError(f"bad training shapes X{X.shape}, y{y.shape}")
    if not np.isfinite(X).all() or not np.isfinite(y).all():
        raise DataError("training data contains non-finite values")
    y = np.where(y > 0, 1.0, -1.0)
    if len(np.unique(y)) < 2:
        raise DataError("SVM training requires both classes")
    return X, y


def svm_train(
    X,
    y,
    gamma: float,
    C: float,
    tol: float = 1e-3,
    max_iter: int = 200_000,
) -> SvmModel:
    """Train on rows of X with labels y (positive label > 0)."""
    X, y = _validate_training_data(X, y)
    if gamma <= 0 or C <= 0:
        raise DataError("gamma and C must be positive")
    n = X.shape[0]
    K = rbf_kernel(X, X, gamma)
    alpha = np.zeros(n)
    u = np.zeros(n)  # u_i = sum_l alpha_l y_l K(x_l, x_i)

    pos, neg = y > 0, y < 0
    m_bound = M_bound = 0.0
    for it in range(max_iter):
        # -E = y - u; i from the "can increase" set, j from "can decrease".
        viol = y - u
        up = (pos & (alpha < C)) | (neg & (alpha > 0))
        low = (pos & (alpha > 0)) | (neg & (alpha < C))
        up_viol = np.where(up, viol, -np.inf)
        low_viol = np.where(low, viol, np.inf)
        i = int(np.argmax(up_viol))
        j = int(np.argmin(low_viol))
        m_bound, M_bound = up_viol[i], low_viol[j]
        if m_bound - M_bound <= tol:
            break

        # Two-variable subproblem along y_i*a_i + y_j*a_j = const.
        eta = K[i, i] + K[j, j] - 2.0 * K[i, j]
        eta = max(eta, 1e-12)
        s = y[i] * y[j]
        if s > 0:
            L = max(0.0, alpha[i] + alpha[j] - C)
            H = min(C, alpha[i] + alpha[j])
        else:
            L = max(0.0, alpha[j] - alpha[i])
            H = min(C, C + alpha[j] - alpha[i])
        # E_i - E_j = (u_i - y_i) - (u_j - y_j)
        aj_new = np.clip(alpha[j] + y[j] * ((u[i] - y[i]) - (u[j] - y[j])) / eta, L, H)
        dj = aj_new - alpha[j]
        if dj == 0.0:
            break  # numerically stuck; bias still well-defined below
        ai_new = alpha[i] - s * dj
        u += (ai_new - alpha[i]) * y[i] * K[i] + dj * y[j] * K[j]
        alpha[i], alpha[j] = ai_new, aj_new
    else:
        warnings.warn(f"SMO hit the iteration cap ({max_iter}); gap {m_bound - M_bound:.2e}")

    free = (alpha > 1e-8) & (alpha < C - 1e-8)
    if free.any():
        bias = float((y[free] - u[free]).mean())
    else:
        bias = float(0.5 * (m_bound + M_bound))

    keep = alpha > 1e-12
    return SvmModel(
        support_vectors=X[keep].copy(),
        dual_coefs=(alpha * y)[keep],
        bias=bias,
        gamma=gamma,
        C=C,
    )


def svm_decision(model: SvmModel, x) -> float | np.ndarray:
    """Kernel expansion sum_i alpha_i y_i K(x_i, x) + b; accepts one vector
    or a stack of rows."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    rows = x[None, :] if single else x
    if rows.shape[1] != model.support_vectors.shape[1]:
        raise DataError(
            f"feature dim {rows.shape[1]} != model dim {model.support_vectors.shape[1]}"
        )
    values = rbf_kernel(rows, model.support_vectors, model.gamma) @ model.dual_coefs + model.bias
    return float(values[0]) if single else values


def svm_dual_objective(X, y, alpha: np.ndarray, gamma: float) -> float:
    """Dual objective sum(alpha) - 0.5 * alpha^T (yy^T * K) alpha."""
    X = np.asarray(X, dtype=np.float64)
    y = np.where(np.asarray(y, dtype=np.float64).ravel() > 0, 1.0, -1.0)
    K = rbf_kernel(X, X, gamma)
    ay = alpha * y
    return float(alpha.sum() - 0.5 * ay @ K @ ay)
