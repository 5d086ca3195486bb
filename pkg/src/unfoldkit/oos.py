"""Out-of-sample extension for learned embeddings.

Two schemes: an eigenfunction extension that smooths the learned kernel's
eigenvectors with an auxiliary RBF kernel, and a direct kernel mapping that
regresses the training embedding onto normalized RBF features.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .kernels import KernelMatrix

OOS_FORMAT_VERSION = 1


def _sq_dists_to(points: np.ndarray, x: np.ndarray) -> np.ndarray:
    diff = points - np.asarray(x, dtype=float)[:, None]
    return np.sum(diff * diff, axis=0)


def rbf_kernel_matrix(points: np.ndarray, bandwidth: float) -> np.ndarray:
    if bandwidth <= 0:
        raise ValueError("bandwidth must be positive")
    g = points.T @ points
    sq = np.diag(g)
    d2 = np.maximum(sq[:, None] + sq[None, :] - 2.0 * g, 0.0)
    return np.exp(-d2 / (2.0 * bandwidth ** 2))


def median_bandwidth(points: np.ndarray) -> float:
    """Median pairwise distance; the default smoothing-kernel width."""
    n = points.shape[1]
    if n < 2:
        raise ValueError("need at least 2 points")
    g = points.T @ points
    sq = np.diag(g)
    d2 = np.maximum(sq[:, None] + sq[None, :] - 2.0 * g, 0.0)
    iu = np.triu_indices(n, k=1)
    med = float(np.median(np.sqrt(d2[iu])))
    if med <= 0:
        raise ValueError("median pairwise distance is zero (duplicate points)")
    return med


@dataclass(frozen=True)
class OosEigenModel:
    """Smoothed-eigenvector extension: y(x) = P r(x).

    ``bandwidth`` is the RBF width used to evaluate the smoothing column
    r(x) at new points; None means the smoothing kernel was supplied
    directly and new points can only be embedded from an explicit column.
    """

    P: np.ndarray  # (p, n)
    R: np.ndarray  # (n, n) smoothing kernel on training points
    eta: float
    bandwidth: float | None
    training_points: np.ndarray  # (d, n)

    @property
    def n(self) -> int:
        return self.R.shape[0]

    @property
    def p(self) -> int:
        return self.P.shape[0]

    def smoothing_column(self, x: np.ndarray) -> np.ndarray:
        if self.bandwidth is None:
            raise ValueError("model was fitted with an explicit smoothing "
                             "kernel; pass the column to embed_column")
        d2 = _sq_dists_to(self.training_points, x)
        return np.exp(-d2 / (2.0 * self.bandwidth ** 2))

    def embed_column(self, r: np.ndarray) -> np.ndarray:
        return self.P @ np.asarray(r, dtype=float)


def fit_oos_eigen(train: Dataset, K: KernelMatrix, p: int | None = None,
                  eta: float | None = None, bandwidth: float | None = None,
                  smoothing_kernel: np.ndarray | None = None) -> OosEigenModel:
    """Fit the eigenfunction extension of a learned kernel.

    Rows of P are p_k = delta_k^(-1/2) v_k^T R (R + eta I)^-1 K (R + eta I)^-1
    for the top p eigenpairs (delta_k, v_k) of K.  The smoothing kernel R
    defaults to an RBF on the training points with the median pairwise
    distance as bandwidth; eta defaults to 1e-6 tr(R)/n.
    """
    n = train.n
    if K.n != n:
        raise ValueError("kernel size does not match training data")
    if smoothing_kernel is not None:
        R = 0.5 * (smoothing_kernel + smoothing_kernel.T)
        if R.shape != (n, n):
            raise ValueError("smoothing kernel size mismatch")
        bw = None
    else:
        bw = bandwidth if bandwidth is not None else median_bandwidth(train.points)
        R = rbf_kernel_matrix(train.points, bw)
    if eta is None:
        eta = 1e-6 * float(np.trace(R)) / n
    if eta <= 0:
        raise ValueError("eta must be positive")

    vals, vecs = np.linalg.eigh(K.values)
    order = np.argsort(vals, kind="stable")[::-1]
    vals, vecs = vals[order], vecs[:, order]
    if p is None:
        # ignore rank-noise eigenvalues: delta^(-1/2) would blow them up
        p = int(np.sum(vals > 1e-12 * max(vals[0], 0.0)))
        if p == 0:
            raise ValueError("kernel has no positive eigenvalues")
    if not 1 <= p <= n:
        raise ValueError(f"p must satisfy 1 <= p <= n, got {p}")
    if np.any(vals[:p] <= 0):
        raise ValueError(f"requested {p} dimensions but only "
                         f"{int(np.sum(vals > 0))} positive eigenvalues")

    Rreg = R + eta * np.eye(n)
    # (R + eta I)^-1 K (R + eta I)^-1, built once and shared by all rows
    inner = np.linalg.solve(Rreg, np.linalg.solve(Rreg, K.values).T).T
    P = (vals[:p] ** -0.5)[:, None] * (vecs[:, :p].T @ R @ inner)
    return OosEigenModel(P=P, R=R, eta=float(eta), bandwidth=bw,
                         training_points=train.points)


def embed_oos_eigen(model: OosEigenModel, x: np.ndarray) -> np.ndarray:
    """Embedding of a new point: P times its smoothing column."""
    return model.embed_column(model.smoothing_column(x))


# ---------------------------------------------------------------------------
# Kernel mapping


@dataclass(frozen=True)
class OosKernelMap:
    """Row-normalized RBF regression onto the training embedding."""

    A: np.ndarray  # (n, p)
    sigmas: np.ndarray  # per-training-point bandwidths
    gamma: float
    training_points: np.ndarray  # (d, n)

    @property
    def n(self) -> int:
        return self.A.shape[0]


@dataclass(frozen=True)
class OosEmbedding:
    """Out-of-sample coordinates; ``zero_rows`` are test points too far from
    every training point for the kernel row to normalize."""

    coordinates: np.ndarray  # (p, n_test)
    zero_rows: tuple


def _kernel_rows(points: np.ndarray, train: np.ndarray, sigmas: np.ndarray):
    """Normalized kernel rows of ``points`` against ``train``; flags rows
    whose unnormalized mass underflows."""
    rows = np.empty((points.shape[1], train.shape[1]))
    zero = []
    for i in range(points.shape[1]):
        d2 = _sq_dists_to(train, points[:, i])
        k = np.exp(-d2 / (2.0 * sigmas ** 2))
        mass = k.sum()
        if mass <= 0:
            zero.append(i)
            rows[i] = 0.0
        else:
            rows[i] = k / mass
    return rows, tuple(zero)


def fit_kernel_map(train: Dataset, Y: np.ndarray, gamma: float = 0.3) -> OosKernelMap:
    """Fit A = pinv(K'') Y with per-point bandwidths gamma * nearest distance.

    ``Y`` is the training embedding, one point per column (p, n).  Duplicate
    training points give a zero bandwidth and are rejected.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    Y = np.asarray(Y, dtype=float)
    n = train.n
    if Y.ndim != 2 or Y.shape[1] != n:
        raise ValueError("embedding must have one column per training point")
    d2 = train.squared_distances()
    off = d2 + np.diag(np.full(n, np.inf))
    nearest = np.sqrt(off.min(axis=1))
    if np.any(nearest <= 0):
        dup = int(np.argmin(nearest))
        raise ValueError(f"training point {dup} duplicates another; "
                         "kernel bandwidth would be zero")
    sigmas = gamma * nearest
    Kpp, zero = _kernel_rows(train.points, train.points, sigmas)
    if zero:
        raise ValueError(f"kernel rows {zero} underflowed; increase gamma")
    A = np.linalg.pinv(Kpp, rcond=1e-10) @ Y.T
    return OosKernelMap(A=A, sigmas=sigmas, gamma=float(gamma),
                        training_points=train.points)


def embed_oos_kernel_map(model: OosKernelMap, test: Dataset) -> OosEmbedding:
    """Embed test points: normalized kernel rows against training, times A."""
    if test.dim != model.training_points.shape[0]:
        raise ValueError("test dimension does not match training data")
    rows, zero = _kernel_rows(test.points, model.training_points, model.sigmas)
    return OosEmbedding(coordinates=(rows @ model.A).T, zero_rows=zero)


# ---------------------------------------------------------------------------
# Serialization


def _digest(points: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(points).tobytes()).hexdigest()


def model_to_json(model) -> str:
    """Serialize either model to a JSON container (row-major matrices)."""
    if isinstance(model, OosEigenModel):
        body = {
            "kind": "eigen",
            "P": model.P.tolist(),
            "R": model.R.tolist(),
            "eta": model.eta,
            "bandwidth": model.bandwidth,
            "training_points": model.training_points.tolist(),
        }
    elif isinstance(model, OosKernelMap):
        body = {
            "kind": "kernel-map",
            "A": model.A.tolist(),
            "sigmas": model.sigmas.tolist(),
            "gamma": model.gamma,
            "training_points": model.training_points.tolist(),
        }
    else:
        raise TypeError(f"cannot serialize {type(model).__name__}")
    body["version"] = OOS_FORMAT_VERSION
    body["training_digest"] = _digest(np.asarray(body["training_points"], dtype=float))
    return json.dumps(body, sort_keys=True)


def model_from_json(text: str):
    """Inverse of model_to_json; validates the training-point digest."""
    body = json.loads(text)
    if body.get("version") != OOS_FORMAT_VERSION:
        raise ValueError(f"unsupported model version {body.get('version')!r}")
    pts = np.asarray(body["training_points"], dtype=float)
    if _digest(pts) != body.get("training_digest"):
        raise ValueError("training-point digest mismatch; file corrupted")
    if body["kind"] == "eigen":
        return OosEigenModel(P=np.asarray(body["P"], dtype=float),
                             R=np.asarray(body["R"], dtype=float),
                             eta=float(body["eta"]),
                             bandwidth=None if body["bandwidth"] is None
                             else float(body["bandwidth"]),
                             training_points=pts)
    if body["kind"] == "kernel-map":
        return OosKernelMap(A=np.asarray(body["A"], dtype=float),
                            sigmas=np.asarray(body["sigmas"], dtype=float),
                            gamma=float(body["gamma"]),
                            training_points=pts)
    raise ValueError(f"unknown model kind {body['kind']!r}")
