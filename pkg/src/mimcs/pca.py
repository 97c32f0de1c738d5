"""Covariance, cyclic-Jacobi eigendecomposition and centred PCA projection."""
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import kernels
from .dataset import SampleMatrix, ValidationError

JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100
# eigenvalues closer than this (relative to the largest) are treated as tied
TIE_RTOL = 1e-12


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class CovarianceMatrix:
    S: np.ndarray
    sample_count: int


class EigenDecomposition(NamedTuple):
    values: np.ndarray
    vectors: np.ndarray
    sweeps: int


@dataclass(frozen=True, eq=False)
class PcaModel:
    mean: np.ndarray
    components: np.ndarray  # d x n, columns are principal axes
    eigenvalues: np.ndarray
    total_variance: float

    @property
    def n_components(self):
        return self.components.shape[1]

    @property
    def explained_variance_ratio(self):
        if self.total_variance <= 0.0:
            return 1.0
        return float(self.eigenvalues.sum() / self.total_variance)

    def to_dict(self):
        return {
            "mean": self.mean.tolist(),
            "eigenvalues": self.eigenvalues.tolist(),
            "components": self.components.tolist(),
            "total_variance": self.total_variance,
            "explained_variance_ratio": self.explained_variance_ratio,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            np.asarray(data["mean"], dtype=float),
            np.asarray(data["components"], dtype=float),
            np.asarray(data["eigenvalues"], dtype=float),
            float(data["total_variance"]),
        )


def covariance(m):
    if m.n < 2:
        raise ValidationError("covariance needs at least two samples")
    Xc = m.X - m.X.mean(axis=0)
    S = (Xc.T @ Xc) / m.n
    S = 0.5 * (S + S.T)
    return CovarianceMatrix(S, m.n)


def _normalize_signs(V):
    V = V.copy()
    for k in range(V.shape[1]):
        if V[np.argmax(np.abs(V[:, k])), k] < 0:
            V[:, k] = -V[:, k]
    return V


def _order(values, vectors):
    idx = list(np.argsort(-values, kind="stable"))
    tie = TIE_RTOL * max(1.0, float(np.max(np.abs(values))) if values.size else 1.0)
    out = []
    start = 0
    while start < len(idx):
        stop = start + 1
        while stop < len(idx) and values[idx[start]] - values[idx[stop]] <= tie:
            stop += 1
        group = idx[start:stop]
        group.sort(key=lambda c: tuple(vectors[:, c]))
        out.extend(group)
        start = stop
    return np.array(out, dtype=np.intp)


def eig_sym(c, tol=JACOBI_TOL, max_sweeps=JACOBI_MAX_SWEEPS):
    """Eigenpairs of a symmetric matrix, largest eigenvalue first.

    Eigenvectors are sign-normalised so their largest-magnitude entry is
    positive; near-equal eigenvalues are ordered by their eigenvectors.
    """
    S = c.S if isinstance(c, CovarianceMatrix) else np.asarray(c, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {S.shape}")
    if not np.array_equal(S, S.T):
        raise ValidationError("matrix is not symmetric")
    values, V, sweeps, off = kernels.jacobi_eigh(np.ascontiguousarray(S, dtype=np.float64), tol, max_sweeps)
    scale = float(np.sqrt(np.sum(S * S)))
    if off > tol * scale:
        raise ConvergenceError(
            f"Jacobi did not converge in {max_sweeps} sweeps (off-diagonal norm {off:.3e})"
        )
    V = _normalize_signs(V)
    order = _order(values, V)
    return EigenDecomposition(values[order], V[:, order], sweeps)


def pca_fit(m, n_components=4):
    if not 1 <= n_components <= m.d:
        raise ValidationError(f"n_components must be in [1, {m.d}], got {n_components}")
    cov = covariance(m)
    eig = eig_sym(cov)
    return PcaModel(
        mean=m.X.mean(axis=0),
        components=eig.vectors[:, :n_components].copy(),
        eigenvalues=eig.values[:n_components].copy(),
        total_variance=float(eig.values.sum()),
    )


def pca_transform(model, x):
    """Project onto the principal axes after centring: ``V'(x - mean)``.

    Accepts one vector, a 2-D batch of rows, or a SampleMatrix (labels kept).
    """
    if isinstance(x, SampleMatrix):
        return x.with_features(pca_transform(model, x.X))
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != model.mean.shape[0]:
        raise ValidationError(f"expected {model.mean.shape[0]} features, got {x.shape[-1]}")
    return (x - model.mean) @ model.components
