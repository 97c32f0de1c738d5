"""Feature-weighted RBF-kernel SVM trained by two-variable SMO on the dual."""
import logging
from dataclasses import dataclass

import numpy as np

from . import kernels
from .dataset import ValidationError

log = logging.getLogger(__name__)

VARIANTS = ("sqrt", "squared")
# multipliers at or below this are not support vectors
SV_FLOOR = 1e-8


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class KernelSpec:
    """``exp(-gamma * g(sum_k w_k (a_k - b_k)^2))``, with g = sqrt or identity."""

    gamma: float
    weights: np.ndarray
    variant: str = "sqrt"

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValidationError(f"gamma must be positive, got {self.gamma}")
        if self.variant not in VARIANTS:
            raise ValidationError(f"unknown kernel variant {self.variant!r}")
        w = np.ascontiguousarray(self.weights, dtype=np.float64).ravel()
        if np.any(w < 0):
            raise ValidationError("feature weights must be non-negative")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "gamma", float(self.gamma))

    def from_sqdist(self, D):
        if self.variant == "sqrt":
            return np.exp(-self.gamma * np.sqrt(D))
        return np.exp(-self.gamma * D)

    def to_dict(self):
        return {"gamma": self.gamma, "weights": self.weights.tolist(), "variant": self.variant}

    @classmethod
    def from_dict(cls, data):
        return cls(float(data["gamma"]), np.asarray(data["weights"], dtype=float), data["variant"])


@dataclass(frozen=True)
class SvmParams:
    C: float
    kkt_tolerance: float = 1e-3
    max_passes: int = 1_000_000

    def __post_init__(self):
        if not self.C > 0:
            raise ValidationError(f"C must be positive, got {self.C}")
        if not self.kkt_tolerance > 0:
            raise ValidationError("kkt_tolerance must be positive")


@dataclass(frozen=True, eq=False)
class SvmModel:
    support_vectors: np.ndarray
    multipliers: np.ndarray
    labels: np.ndarray
    bias: float
    kernel: KernelSpec
    C: float = float("inf")
    converged: bool = True
    iterations: int = 0

    @property
    def dual_coef(self):
        return self.multipliers * self.labels

    def to_dict(self):
        return {
            "kernel": self.kernel.to_dict(),
            "C": self.C,
            "bias": self.bias,
            "support_vectors": self.support_vectors.tolist(),
            "multipliers": self.multipliers.tolist(),
            "labels": self.labels.tolist(),
            "converged": self.converged,
            "iterations": self.iterations,
        }

    @classmethod
    def from_dict(cls, data):
        kernel = KernelSpec.from_dict(data["kernel"])
        d = kernel.weights.shape[0]
        return cls(
            np.asarray(data["support_vectors"], dtype=float).reshape(-1, d),
            np.asarray(data["multipliers"], dtype=float),
            np.asarray(data["labels"], dtype=float),
            float(data["bias"]),
            kernel,
            float(data["C"]),
            bool(data["converged"]),
            int(data["iterations"]),
        )


def _check_dim(x, spec):
    if x.shape[-1] != spec.weights.shape[0]:
        raise ValidationError(
            f"feature dimension {x.shape[-1]} does not match kernel dimension {spec.weights.shape[0]}"
        )


def kernel_eval(xi, xj, spec):
    xi = np.asarray(xi, dtype=float).ravel()
    xj = np.asarray(xj, dtype=float).ravel()
    if xi.shape != xj.shape:
        raise ValidationError(f"vectors differ in length: {xi.shape[0]} vs {xj.shape[0]}")
    _check_dim(xi, spec)
    diff = xi - xj
    return float(spec.from_sqdist(np.dot(spec.weights, diff * diff)))


def weighted_sqdist_matrix(X, weights):
    """Symmetric matrix of weighted squared distances (zero diagonal)."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    return kernels.pairwise_sqdist(X, np.ascontiguousarray(weights, dtype=np.float64))


def gram_matrix(X, spec):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    _check_dim(X, spec)
    return spec.from_sqdist(weighted_sqdist_matrix(X, spec.weights))


def cross_kernel(A, B, spec):
    A = np.ascontiguousarray(np.atleast_2d(A), dtype=np.float64)
    B = np.ascontiguousarray(np.atleast_2d(B), dtype=np.float64)
    _check_dim(A, spec)
    _check_dim(B, spec)
    return spec.from_sqdist(kernels.weighted_sqdist(A, B, spec.weights))


@dataclass(frozen=True, eq=False)
class DualSolution:
    """Raw solver output over all training points (before SV extraction)."""

    multipliers: np.ndarray
    gradient: np.ndarray
    bias: float
    iterations: int
    converged: bool

    def decision_on_train(self, K, y):
        return K @ (self.multipliers * y) + self.bias


def solve_dual(K, y, params):
    """SMO on a precomputed Gram matrix ``K`` with labels ``y`` in {+1, -1}."""
    y = np.ascontiguousarray(y, dtype=np.float64)
    if y.size < 2:
        raise ValidationError("training needs at least two samples")
    if not (np.any(y > 0) and np.any(y < 0)):
        raise ValidationError("training data must contain both classes")
    K = np.ascontiguousarray(K, dtype=np.float64)
    C = float(params.C)
    a, G, iters, converged, m_up, m_low = kernels.smo_solve(
        K, y, C, float(params.kkt_tolerance), int(params.max_passes)
    )
    free = (a > 0.0) & (a < C)
    if np.any(free):
        bias = float(np.mean(-y[free] * G[free]))
    else:
        bias = 0.5 * (m_up + m_low)
    if not converged:
        log.warning("SMO hit the iteration cap (%d) with KKT gap %.3g", iters, m_up - m_low)
    return DualSolution(a, G, bias, int(iters), bool(converged))


def model_from_solution(X, y, sol, spec, C):
    sv = sol.multipliers > SV_FLOOR
    return SvmModel(
        support_vectors=np.array(X[sv], dtype=float),
        multipliers=sol.multipliers[sv].copy(),
        labels=np.asarray(y, dtype=float)[sv].copy(),
        bias=sol.bias,
        kernel=spec,
        C=float(C),
        converged=sol.converged,
        iterations=sol.iterations,
    )


def train(X, y, params, spec):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    if X.shape[0] != y.shape[0]:
        raise ValidationError("X and y differ in length")
    sol = solve_dual(gram_matrix(X, spec), y, params)
    return model_from_solution(X, y, sol, spec, params.C)


def decision_value(model, x):
    """Pre-sign decision value; a 2-D ``x`` returns one value per row."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = np.atleast_2d(x)
    _check_dim(X, model.kernel)
    if model.multipliers.size == 0:
        out = np.full(X.shape[0], model.bias)
    else:
        # elementwise product then sum: BLAS gemv may fuse multiply-adds and
        # break exact cancellation at the tie point
        out = (cross_kernel(X, model.support_vectors, model.kernel) * model.dual_coef).sum(axis=1) + model.bias
    return float(out[0]) if single else out


def predict(model, x):
    v = decision_value(model, x)
    if np.ndim(v) == 0:
        return 1 if v >= 0 else -1
    return np.where(v >= 0, 1, -1)


def dual_objective(K, y, multipliers):
    """Value of sum(a) - 0.5 a'Qa; the solver maximises this."""
    ay = multipliers * y
    return float(multipliers.sum() - 0.5 * ay @ K @ ay)
