"""Two-parameter logistic calibration of decision statistics.

Uses the classic parameterization p(s) = 1 / (1 + exp(A*s + B)), so
statistics that rank threats above non-threats fit A < 0 and the calibrated
output increases with s.  Fitting minimizes the cross-entropy by damped
Newton steps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DataError

__all__ = ["PlattParams", "platt_fit", "platt_apply"]


@dataclass(frozen=True)
class PlattParams:
    A: float
    B: float


def platt_fit(stats, labels, tol: float = 1e-8, max_iter: int = 200) -> PlattParams:
    """Fit (A, B) to binary labels (positive > 0).

    Perfectly separable statistics push |A| up until the iteration cap;
    outputs stay inside (0, 1) regardless.
    """
    s = np.asarray(stats, dtype=np.float64).ravel()
    y = (np.asarray(labels).ravel() > 0).astype(np.float64)
    if s.size != y.size or s.size == 0:
        raise DataError("stats and labels must be equal-length and non-empty")
    if not np.isfinite(s).all():
        raise DataError("statistics contain non-finite values")
    if y.min() == y.max():
        raise DataError("Platt fitting requires both classes")

    n_pos, n_neg = y.sum(), y.size - y.sum()
    A, B = 0.0, float(np.log((n_neg + 1.0) / (n_pos + 1.0)))

    def loss_and_grads(a, b):
        z = np.clip(a * s + b, -500, 500)
        p = 1.0 / (1.0 + np.exp(z))
        loss = float(np.sum(np.logaddexp(0.0, z) - (1.0 - y) * z))
        r = y - p
        grad = np.array([np.dot(r, s), r.sum()])
        w = p * (1.0 - p)
        hess = np.array([[np.dot(w, s * s), np.dot(w, s)], [np.dot(w, s), w.sum()]])
        return loss, grad, hess

    loss, grad, hess = loss_and_grads(A, B)
    for _ in range(max_iter):
        if np.linalg.norm(grad) < tol:
            break
        step = np.linalg.solve(hess + 1e-12 * np.eye(2), grad)
        scale = 1.0
        for _ in range(40):  # damp until the loss actually decreases
            new_loss, new_grad, new_hess = loss_and_grads(A - scale * step[0], B - scale * step[1])
            if new_loss <= loss:
                break
            scale *= 0.5
        else:
            break
        A, B = A - scale * step[0], B - scale * step[1]
        loss, grad, hess = new_loss, new_grad, new_hess
    return PlattParams(float(A), float(B))


def platt_apply(p: PlattParams, s):
    """Calibrated statistic 1 / (1 + exp(A*s + B)), strictly inside (0, 1)
    and monotone in s.  The exponent is clipped to +/-36, the widest range
    where float64 keeps the output strictly away from 0 and 1."""
    z = np.clip(p.A * np.asarray(s, dtype=np.float64) + p.B, -36.0, 36.0)
    out = 1.0 / (1.0 + np.exp(z))
    return float(out) if out.ndim == 0 else out
