"""Kernel constructions that make every spectral method a kernel PCA."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .data import Dataset
from .graph import AlignmentMatrix, DistanceMatrix, NeighborGraph, _symmetric_weights

CATALOG_METHODS = (
    "pca", "mds", "isomap", "spectral-clustering",
    "laplacian-eigenmap-pinv", "lle-shift", "lle-pinv", "diffusion",
)

PINV_CUTOFF = 1e-10


def centering_matrix(n: int) -> np.ndarray:
    return np.eye(n) - np.ones((n, n)) / n


@dataclass(frozen=True)
class KernelMatrix:
    """Symmetric similarity matrix with bookkeeping flags."""

    values: np.ndarray
    method: str = "custom"
    centered: bool = False
    psd_checked: bool = False

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        scale = np.abs(v).max() if v.size else 0.0
        if not np.allclose(v, v.T, atol=1e-12 * max(scale, 1.0)):
            raise ValueError("kernel matrix must be symmetric")
        v = 0.5 * (v + v.T)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def check_psd(self, rel_tol: float = 1e-9) -> "KernelMatrix":
        """Eigenvalue check; opt-in because it costs a full decomposition."""
        eigvals = np.linalg.eigvalsh(self.values)
        lam_max = max(eigvals[-1], 0.0)
        if eigvals[0] < -rel_tol * max(lam_max, 1e-300):
            raise ValueError(f"kernel is not PSD: min eigenvalue {eigvals[0]:.3e}")
        return replace(self, psd_checked=True)


def center_kernel(K: KernelMatrix) -> KernelMatrix:
    """Double centering H K H; idempotent."""
    H = centering_matrix(K.n)
    return KernelMatrix(values=H @ K.values @ H, method=K.method, centered=True)


def _spectral_pinv(M: np.ndarray) -> np.ndarray:
    """Pseudo-inverse by eigendecomposition with a relative eigenvalue cutoff."""
    vals, vecs = np.linalg.eigh(0.5 * (M + M.T))
    lam_max = np.abs(vals).max() if vals.size else 0.0
    inv = np.where(np.abs(vals) > PINV_CUTOFF * max(lam_max, 1e-300), 1.0 / vals, 0.0)
    return (vecs * inv) @ vecs.T


def linear_kernel(data: Dataset) -> KernelMatrix:
    return KernelMatrix(values=data.gram(), method="pca")


def distance_kernel(D: DistanceMatrix) -> KernelMatrix:
    """-1/2 H D H; the MDS kernel for Euclidean D, the Isomap kernel for geodesic D."""
    H = centering_matrix(D.values.shape[0])
    method = "mds" if D.kind == "euclidean" else "isomap"
    return KernelMatrix(values=-0.5 * H @ D.values @ H, method=method, centered=True)


def adjacency_kernel(graph: NeighborGraph, sigma: float | None = None) -> KernelMatrix:
    """Degree-normalized adjacency W_ij / sqrt(D_ii D_jj) with RBF weights."""
    W = _symmetric_weights(graph, "rbf", sigma)
    deg = W.sum(axis=1)
    if np.any(deg == 0):
        raise ValueError("zero-degree node; cannot normalize adjacency")
    K = W / np.sqrt(np.outer(deg, deg))
    return KernelMatrix(values=K, method="spectral-clustering")


def laplacian_pinv_kernel(L: np.ndarray) -> KernelMatrix:
    return KernelMatrix(values=_spectral_pinv(L), method="laplacian-eigenmap-pinv", centered=True)


def alignment_shift_kernel(M: AlignmentMatrix) -> KernelMatrix:
    """lambda_max * I - M, which reverses the eigenvector order of M."""
    vals = np.linalg.eigvalsh(M.values)
    lam_max = vals[-1]
    K = lam_max * np.eye(M.values.shape[0]) - M.values
    return KernelMatrix(values=K, method="lle-shift")


def alignment_pinv_kernel(M: AlignmentMatrix) -> KernelMatrix:
    return KernelMatrix(values=_spectral_pinv(M.values), method="lle-pinv")


def diffusion_kernel(M: AlignmentMatrix) -> KernelMatrix:
    # The transition operator is row-stochastic, not exactly symmetric;
    # symmetrize for use as a kernel.
    return KernelMatrix(values=0.5 * (M.values + M.values.T), method="diffusion")


_BUILDERS = {
    "pca": linear_kernel,
    "mds": distance_kernel,
    "isomap": distance_kernel,
    "spectral-clustering": adjacency_kernel,
    "laplacian-eigenmap-pinv": laplacian_pinv_kernel,
    "lle-shift": alignment_shift_kernel,
    "lle-pinv": alignment_pinv_kernel,
    "diffusion": diffusion_kernel,
}


def build_catalog_kernel(method: str, inputs) -> KernelMatrix:
    """Construct the catalog kernel named by ``method`` from its natural input.

    Inputs by method: pca takes a Dataset; mds/isomap a DistanceMatrix;
    spectral-clustering a NeighborGraph; laplacian-eigenmap-pinv a Laplacian
    matrix; lle-shift/lle-pinv/diffusion an AlignmentMatrix.
    """
    if method not in _BUILDERS:
        raise ValueError(f"unknown kernel method {method!r}; choose from {CATALOG_METHODS}")
    if method in ("mds", "isomap"):
        if not isinstance(inputs, DistanceMatrix):
            raise TypeError(f"{method} kernel needs a DistanceMatrix")
        expected = "euclidean" if method == "mds" else "geodesic"
        if inputs.kind != expected:
            raise ValueError(f"{method} kernel needs a {expected} DistanceMatrix, got {inputs.kind}")
    if method == "pca" and not isinstance(inputs, Dataset):
        raise TypeError("pca kernel needs a Dataset")
    return _BUILDERS[method](inputs)


def hsic(K: KernelMatrix, K_l: KernelMatrix) -> float:
    """tr(K_l H K H) / (n - 1)^2, the kernel dependence measure."""
    n = K.n
    if n < 2:
        raise ValueError("HSIC needs at least 2 points")
    if K_l.n != n:
        raise ValueError("kernel sizes differ")
    H = centering_matrix(n)
    return float(np.trace(K_l.values @ H @ K.values @ H)) / (n - 1) ** 2


def delta_kernel(labels) -> KernelMatrix:
    """Indicator kernel: 1 where labels agree, 0 elsewhere."""
    labels = list(labels)
    if not labels:
        raise ValueError("labels must be non-empty")
    arr = np.array([[1.0 if a == b else 0.0 for b in labels] for a in labels])
    return KernelMatrix(values=arr, method="delta")
