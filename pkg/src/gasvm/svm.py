"""Soft-margin RBF-kernel SVM trained by sequential minimal optimization.

The dual problem  min 0.5*a'Qa - e'a  with Q_ij = y_i y_j K(x_i, x_j),
subject to 0 <= a_i <= C and y'a = 0, is solved by pairwise coordinate
steps on the maximal-KKT-violating pair, the standard first-order working
set rule.  Stops when the maximal violation drops below the KKT tolerance
or the iteration cap is hit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit


@dataclass(frozen=True)
class SolverConfig:
    """KKT stopping tolerance and the hard cap on pairwise update passes."""

    tol: float = 1e-3
    max_iter: int = 100_000


@dataclass(frozen=True)
class SvmParams:
    cost: float
    gamma: float

    def __post_init__(self):
        if not (self.cost > 0 and math.isfinite(self.cost)):
            raise ValueError(f"cost must be positive, got {self.cost}")
        if not (self.gamma > 0 and math.isfinite(self.gamma)):
            raise ValueError(f"gamma must be positive, got {self.gamma}")


def rbf_kernel(x: np.ndarray, z: np.ndarray, gamma: float) -> float:
    """exp(-gamma * ||x - z||^2); always in (0, 1]."""
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    if x.shape != z.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {z.shape}")
    d = x - z
    return float(np.exp(-gamma * np.dot(d, d)))


def rbf_kernel_matrix(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    """Pairwise RBF kernel values between the rows of A and rows of B."""
    A = np.ascontiguousarray(A, dtype=float)
    B = np.ascontiguousarray(B, dtype=float)
    if A.shape[1] != B.shape[1]:
        raise ValueError(f"dimension mismatch: {A.shape[1]} vs {B.shape[1]} columns")
    # ||a-b||^2 = ||a||^2 + ||b||^2 - 2 a.b, built in place to avoid churn
    K = A @ B.T
    K *= -2.0
    K += (A * A).sum(axis=1)[:, None]
    K += (B * B).sum(axis=1)[None, :]
    np.maximum(K, 0.0, out=K)
    K *= -gamma
    np.exp(K, out=K)
    return K


@njit(cache=True, fastmath=True)
def _smo_solve(K, y, C, tol, max_iter):  # pragma: no cover - exercised via train()
    """Maximal-violating-pair SMO on a precomputed kernel matrix.

    Returns (alpha, grad, iterations, converged) where grad is the gradient
    of the dual minimization objective at the solution.
    """
    n = y.shape[0]
    alpha = np.zeros(n)
    grad = -np.ones(n)
    it = 0
    converged = False
    while it < max_iter:
        # Working set: i maximizes -y*grad over I_up, j minimizes over I_low.
        i = -1
        j = -1
        g_max = -1e300
        g_min = 1e300
        for t in range(n):
            v = -y[t] * grad[t]
            if (y[t] > 0 and alpha[t] < C) or (y[t] < 0 and alpha[t] > 0):
                if v > g_max:
                    g_max = v
                    i = t
            if (y[t] > 0 and alpha[t] > 0) or (y[t] < 0 and alpha[t] < C):
                if v < g_min:
                    g_min = v
                    j = t
        if i < 0 or j < 0 or g_max - g_min <= tol:
            converged = True
            break
        # Analytic step along (d_i, d_j) = (y_i, -y_j), clipped to the box.
        quad = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if quad <= 0.0:
            quad = 1e-12
        step = (g_max - g_min) / quad
        if y[i] > 0:
            step = min(step, C - alpha[i])
        else:
            step = min(step, alpha[i])
        if y[j] > 0:
            step = min(step, alpha[j])
        else:
            step = min(step, C - alpha[j])
        d_i = y[i] * step
        d_j = -y[j] * step
        alpha[i] += d_i
        alpha[j] += d_j
        for t in range(n):
            grad[t] += y[t] * (y[i] * K[i, t] * d_i + y[j] * K[j, t] * d_j)
        it += 1
    return alpha, grad, it, converged


@dataclass(frozen=True)
class TrainedSvm:
    """Fitted decision function: support vectors, signed duals alpha_i*y_i, bias."""

    support_vectors: np.ndarray
    dual_coefs: np.ndarray
    bias: float
    params: SvmParams
    feature_count: int
    dual_objective: float
    iterations: int
    converged: bool

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.feature_count:
            raise ValueError(
                f"expected query matrix with {self.feature_count} columns, got shape {X.shape}"
            )
        if X.shape[0] == 0:
            return np.empty(0)
        K = rbf_kernel_matrix(X, self.support_vectors, self.params.gamma)
        return K @ self.dual_coefs + self.bias

    def predict(self, X: np.ndarray) -> np.ndarray:
        """Labels in {0, 1}; a raw score of exactly 0 maps to the majority class 0."""
        return (self.decision_function(X) > 0.0).astype(np.int64)


def train(X: np.ndarray, y: np.ndarray, params: SvmParams,
          solver_cfg: SolverConfig | None = None) -> TrainedSvm:
    """Fit the dual soft-margin SVM; y holds class labels in {0, 1}."""
    cfg = solver_cfg or SolverConfig()
    X = np.ascontiguousarray(X, dtype=float)
    y = np.asarray(y)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("X must be a nonempty 2-D matrix")
    if X.shape[0] != y.shape[0]:
        raise ValueError("X and y lengths differ")
    if not np.all(np.isfinite(X)):
        raise ValueError("X contains non-finite values")
    labels = np.unique(y)
    if not np.isin(labels, (0, 1)).all():
        raise ValueError(f"labels must be 0/1, got {labels}")
    if len(labels) < 2:
        raise ValueError("training data contains a single class")

    y_signed = np.where(y == 1, 1.0, -1.0)
    K = rbf_kernel_matrix(X, X, params.gamma)
    alpha, grad, iterations, converged = _smo_solve(
        K, y_signed, float(params.cost), float(cfg.tol), int(cfg.max_iter)
    )

    # Bias from KKT-free points, or the midpoint of the final violation gap.
    free = (alpha > 1e-12) & (alpha < params.cost - 1e-12)
    g = -y_signed * grad
    if free.any():
        bias = float(g[free].mean())
    else:
        up = ((y_signed > 0) & (alpha < params.cost)) | ((y_signed < 0) & (alpha > 0))
        low = ((y_signed > 0) & (alpha > 0)) | ((y_signed < 0) & (alpha < params.cost))
        hi = g[up].max() if up.any() else 0.0
        lo = g[low].min() if low.any() else 0.0
        bias = float((hi + lo) / 2.0)

    dual_objective = float(0.5 * (alpha.sum() - alpha @ grad))
    sv = alpha > 1e-12
    return TrainedSvm(
        support_vectors=X[sv].copy(),
        dual_coefs=(alpha[sv] * y_signed[sv]),
        bias=bias,
        params=params,
        feature_count=X.shape[1],
        dual_objective=dual_objective,
        iterations=iterations,
        converged=converged,
    )


@dataclass(frozen=True)
class ConfusionMetrics:
    """Imbalance-aware rates; an undefined rate (single-class truth) is NaN."""

    tp: int
    tn: int
    fp: int
    fn: int
    sensitivity: float = field(init=False)
    specificity: float = field(init=False)
    accuracy_product: float = field(init=False)

    def __post_init__(self):
        pos = self.tp + self.fn
        neg = self.tn + self.fp
        object.__setattr__(self, "sensitivity", self.tp / pos if pos else math.nan)
        object.__setattr__(self, "specificity", self.tn / neg if neg else math.nan)
        object.__setattr__(self, "accuracy_product", self.sensitivity * self.specificity)

    @property
    def degenerate(self) -> bool:
        return math.isnan(self.sensitivity) or math.isnan(self.specificity)


def confusion_metrics(predicted: np.ndarray, truth: np.ndarray) -> ConfusionMetrics:
    """Sensitivity TP/(TP+FN) on class 1, specificity TN/(TN+FP) on class 0."""
    predicted = np.asarray(predicted)
    truth = np.asarray(truth)
    if predicted.shape != truth.shape:
        raise ValueError(f"length mismatch: {predicted.shape} vs {truth.shape}")
    tp = int(np.sum((predicted == 1) & (truth == 1)))
    tn = int(np.sum((predicted == 0) & (truth == 0)))
    fp = int(np.sum((predicted == 1) & (truth == 0)))
    fn = int(np.sum((predicted == 0) & (truth == 1)))
    return ConfusionMetrics(tp=tp, tn=tn, fp=fp, fn=fn)


def dump_model(model: TrainedSvm) -> str:
    """Debug dump of a fitted model as line-oriented text (format not stable)."""
    lines = [
        f"cost {model.params.cost!r}",
        f"gamma {model.params.gamma!r}",
        f"bias {model.bias!r}",
        f"features {model.feature_count}",
        f"support_vectors {len(model.dual_coefs)}",
        f"dual_objective {model.dual_objective!r}",
        f"iterations {model.iterations} converged {model.converged}",
    ]
    for coef, vec in zip(model.dual_coefs, model.support_vectors):
        lines.append(f"sv {coef!r} " + " ".join(repr(float(v)) for v in vec))
    return "\n".join(lines) + "\n"
