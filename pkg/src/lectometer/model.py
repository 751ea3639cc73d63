"""L2-regularized multinomial logistic regression.

Objective (summed over samples, bias unregularized):

    L(W, b) = sum_i -log softmax(W x_i + b)[y_i] + ||W||_F^2 / (2 C)

The objective is strictly convex in W (and convex overall), so any
deterministic descent method lands on the same optimum.  We use L-BFGS-B
from scipy with W = b = 0 initialization, which makes fitting fully
deterministic: identical inputs give bit-identical parameters.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import minimize
from scipy.special import logsumexp


class ModelError(Exception):
    pass


@dataclass(frozen=True)
class ProbeModel:
    classes: tuple[str, ...]
    W: np.ndarray
    b: np.ndarray
    reg_strength_C: float

    def __post_init__(self):
        K = len(self.classes)
        if K < 2:
            raise ModelError("need at least 2 classes")
        if list(self.classes) != sorted(self.classes):
            raise ModelError("classes must be sorted lexicographically")
        if len(set(self.classes)) != K:
            raise ModelError("classes must be unique")
        if self.W.shape[0] != K or self.b.shape != (K,):
            raise ModelError("parameter shapes inconsistent with class count")
        if not (np.all(np.isfinite(self.W)) and np.all(np.isfinite(self.b))):
            raise ModelError("non-finite parameters")
        if not (self.reg_strength_C > 0):
            raise ModelError("reg_strength_C must be positive")
        self.W.setflags(write=False)
        self.b.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.W.shape[1]


@dataclass(frozen=True)
class FitReport:
    final_objective: float
    grad_inf_norm: float
    iterations: int
    converged: bool


def objective_and_gradient(
    W: np.ndarray,
    b: np.ndarray,
    X: np.ndarray,
    y: np.ndarray,
    C: float,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Summed negative log-likelihood plus L2 penalty, with exact gradients."""
    W = np.asarray(W, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.intp)
    if not (np.all(np.isfinite(W)) and np.all(np.isfinite(b)) and np.all(np.isfinite(X))):
        raise ModelError("non-finite input")
    N = X.shape[0]
    logits = X @ W.T + b  # N x K
    log_norm = logsumexp(logits, axis=1)
    nll = float(np.sum(log_norm - logits[np.arange(N), y]))
    objective = nll + float(np.sum(W * W)) / (2.0 * C)

    P = np.exp(logits - log_norm[:, None])  # N x K softmax rows
    P[np.arange(N), y] -= 1.0
    grad_W = P.T @ X + W / C
    grad_b = P.sum(axis=0)
    return objective, grad_W, grad_b


def fit(
    X: np.ndarray,
    y_labels,
    C: float = 1.0,
    tol: float = 1e-6,
    max_iter: int = 1000,
    seed: int = 0,
    init: tuple[np.ndarray, np.ndarray] | None = None,
) -> tuple[ProbeModel, FitReport]:
    """Fit the probe on labeled vectors.

    `y_labels` is a sequence of label strings; the class order of the fitted
    model is their sorted set.  `seed` is recorded for provenance only: the
    default zero initialization and the deterministic optimizer make the
    result independent of it.  `init` overrides the initial (W, b), used to
    check that different starting points reach the same optimum.
    """
    X = np.asarray(X, dtype=np.float64)
    if not np.all(np.isfinite(X)):
        raise ModelError("non-finite features")
    classes = tuple(sorted(set(y_labels)))
    if len(classes) < 2:
        raise ModelError(f"need at least 2 distinct classes, got {classes}")
    class_index = {c: i for i, c in enumerate(classes)}
    y = np.array([class_index[label] for label in y_labels], dtype=np.intp)
    K, dim = len(classes), X.shape[1]

    def unpack(theta):
        return theta[: K * dim].reshape(K, dim), theta[K * dim :]

    def fun(theta):
        W, b = unpack(theta)
        obj, gW, gb = objective_and_gradient(W, b, X, y, C)
        return obj, np.concatenate([gW.ravel(), gb])

    if init is not None:
        theta0 = np.concatenate(
            [np.asarray(init[0], dtype=np.float64).ravel(), np.asarray(init[1], dtype=np.float64)]
        )
    else:
        theta0 = np.zeros(K * dim + K)

    result = minimize(
        fun,
        theta0,
        jac=True,
        method="L-BFGS-B",
        options={"maxiter": max_iter, "gtol": tol, "ftol": 0.0},
    )
    W, b = unpack(result.x)
    _, gW, gb = objective_and_gradient(W, b, X, y, C)
    grad_inf = float(max(np.abs(gW).max(), np.abs(gb).max()))
    model = ProbeModel(classes=classes, W=W.copy(), b=b.copy(), reg_strength_C=C)
    report = FitReport(
        final_objective=float(result.fun),
        grad_inf_norm=grad_inf,
        iterations=int(result.nit),
        converged=grad_inf <= tol,
    )
    return model, report


def predict_proba(model: ProbeModel, x: np.ndarray) -> np.ndarray:
    """Softmax class probabilities for one vector or a matrix of vectors."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    X = x[None, :] if single else x
    if X.shape[1] != model.dim:
        raise ModelError(f"feature dim {X.shape[1]} != model dim {model.dim}")
    if not np.all(np.isfinite(X)):
        raise ModelError("non-finite input")
    logits = X @ model.W.T + model.b
    P = np.exp(logits - logsumexp(logits, axis=1)[:, None])
    return P[0] if single else P


def predict_label(model: ProbeModel, x: np.ndarray):
    """Most probable class; ties go to the lexicographically first class."""
    P = predict_proba(model, x)
    if P.ndim == 1:
        return model.classes[int(np.argmax(P))]
    return [model.classes[i] for i in np.argmax(P, axis=1)]


def save_model(model: ProbeModel, pooling: str, path: str | Path) -> None:
    payload = {
        "classes": list(model.classes),
        "C": model.reg_strength_C,
        "W": model.W.ravel().tolist(),
        "b": model.b.tolist(),
        "pooling": pooling,
        "dim": model.dim,
    }
    Path(path).write_text(json.dumps(payload) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> tuple[ProbeModel, str]:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    classes = tuple(raw["classes"])
    dim = int(raw["dim"])
    W = np.array(raw["W"], dtype=np.float64).reshape(len(classes), dim)
    b = np.array(raw["b"], dtype=np.float64)
    model = ProbeModel(classes=classes, W=W, b=b, reg_strength_C=float(raw["C"]))
    return model, raw["pooling"]
