"""Embedding from kernel eigendecomposition and Nystrom-style eigenfunctions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .kernels import KernelMatrix


@dataclass(frozen=True)
class Embedding:
    """Low-dimensional coordinates, one point per column."""

    coordinates: np.ndarray  # (p, n)
    eigenvalues: np.ndarray  # full nonincreasing spectrum, length n
    p: int
    clamped: int = 0  # count of requested dimensions with negative eigenvalues

    def pairwise_sq_distances(self) -> np.ndarray:
        g = self.coordinates.T @ self.coordinates
        sq = np.diag(g)
        return np.maximum(sq[:, None] + sq[None, :] - 2.0 * g, 0.0)


def _signed_eigh(K: np.ndarray):
    """Symmetric eigendecomposition, eigenvalues descending, deterministic signs.

    Each eigenvector is flipped so its largest-magnitude entry is positive.
    """
    vals, vecs = np.linalg.eigh(K)
    order = np.argsort(vals, kind="stable")[::-1]
    vals = vals[order]
    vecs = vecs[:, order]
    for k in range(vecs.shape[1]):
        pivot = np.argmax(np.abs(vecs[:, k]))
        if vecs[pivot, k] < 0:
            vecs[:, k] = -vecs[:, k]
    return vals, vecs


def embed_from_kernel(K: KernelMatrix, p: int) -> Embedding:
    """Rows sqrt(delta_k) v_k^T for the p largest eigenvalues.

    Negative eigenvalues are clamped to zero (their coordinate rows are
    zero) and counted in ``clamped``.
    """
    n = K.n
    if not 1 <= p <= n:
        raise ValueError(f"p must satisfy 1 <= p <= n, got {p}")
    vals, vecs = _signed_eigh(K.values)
    clamped = int(np.sum(vals[:p] < 0))
    coords = np.sqrt(np.maximum(vals[:p], 0.0))[:, None] * vecs[:, :p].T
    return Embedding(coordinates=coords, eigenvalues=vals, p=p, clamped=clamped)


@dataclass(frozen=True)
class EigenfunctionModel:
    """Eigenvectors of a centered training kernel plus the pieces needed to
    center and evaluate out-of-sample kernel columns."""

    eigenvectors: np.ndarray  # (n, n), columns orthonormal
    eigenvalues: np.ndarray  # descending
    row_means: np.ndarray  # row means of the *uncentered* training kernel
    grand_mean: float
    training_points: np.ndarray  # (d, n)
    kernel_fn: object  # kernel_fn(X_train, x) -> length-n column of k(x_i, x)

    @property
    def n(self) -> int:
        return self.eigenvectors.shape[0]

    def centered_column(self, x: np.ndarray) -> np.ndarray:
        """Centered kernel column between training points and x."""
        col = np.asarray(self.kernel_fn(self.training_points, np.asarray(x, dtype=float)))
        return col - col.mean() - self.row_means + self.grand_mean


def fit_eigenfunction_model(train: Dataset, kernel_fn) -> EigenfunctionModel:
    """Build the model from a kernel function evaluable at new points."""
    X = train.points
    n = train.n
    K = np.empty((n, n))
    for i in range(n):
        K[:, i] = kernel_fn(X, X[:, i])
    K = 0.5 * (K + K.T)
    row_means = K.mean(axis=1)
    grand = float(K.mean())
    Kc = K - row_means[:, None] - row_means[None, :] + grand
    vals, vecs = _signed_eigh(Kc)
    return EigenfunctionModel(eigenvectors=vecs, eigenvalues=vals, row_means=row_means,
                              grand_mean=grand, training_points=X, kernel_fn=kernel_fn)


def eval_eigenfunction(model: EigenfunctionModel, k: int, x: np.ndarray) -> float:
    """Nystrom eigenfunction value f_k(x) = (sqrt(n)/delta_k) sum_i v_ki kc(x_i, x)."""
    if model.n < 2:
        raise ValueError("eigenfunctions are undefined for a single point")
    delta = model.eigenvalues[k]
    if delta <= 0:
        raise ValueError(f"eigenvalue {k} is not positive (rank deficiency)")
    col = model.centered_column(x)
    return float(np.sqrt(model.n) / delta * (model.eigenvectors[:, k] @ col))


def embed_out_of_sample(model: EigenfunctionModel, x: np.ndarray, p: int) -> np.ndarray:
    """Out-of-sample embedding y_k(x) = (1/sqrt(delta_k)) sum_i v_ki kc(x_i, x)."""
    positive = int(np.sum(model.eigenvalues > 0))
    if p > positive:
        raise ValueError(f"p={p} exceeds the {positive} positive eigenvalues")
    col = model.centered_column(x)
    deltas = model.eigenvalues[:p]
    return (model.eigenvectors[:, :p].T @ col) / np.sqrt(deltas)


def intrinsic_dimension(eigenvalues, gap_ratio: float = 10.0) -> int:
    """Smallest p with an eigenvalue drop of at least ``gap_ratio`` after it.

    Values past the end of the list count as zero, so if no internal gap
    qualifies the answer is the number of positive eigenvalues.
    """
    vals = np.asarray(eigenvalues, dtype=float)
    if gap_ratio <= 1:
        raise ValueError("gap_ratio must exceed 1")
    positive = vals[vals > 0]
    if positive.size == 0:
        raise ValueError("no positive eigenvalues")
    for p in range(1, positive.size):
        nxt = positive[p]
        if positive[p - 1] / nxt >= gap_ratio:
            return p
    return positive.size
