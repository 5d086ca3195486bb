"""Neighborhood graphs, geodesics, Laplacians, and LLE alignment matrices."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components, dijkstra

from .data import Dataset


class DisconnectedGraphError(ValueError):
    """Raised when an operation needs a connected graph but got components."""

    def __init__(self, components):
        self.components = components
        parts = "; ".join(str(sorted(c)) for c in components)
        super().__init__(f"graph is disconnected into {len(components)} components: {parts}")


@dataclass(frozen=True)
class NeighborGraph:
    """Directed kNN graph: edge (i, j) means j is one of i's k neighbors."""

    n: int
    k: int
    edges: frozenset  # ordered pairs (i, j)
    lengths: dict  # (i, j) -> Euclidean length

    def __post_init__(self):
        for (i, j) in self.edges:
            if i == j:
                raise ValueError("self-edges are not allowed")
        for length in self.lengths.values():
            if not (np.isfinite(length) and length >= 0):
                raise ValueError("edge lengths must be nonnegative and finite")

    def tau(self, i: int, j: int) -> int:
        """Neighbor indicator: 1 iff (i, j) is a graph edge."""
        return 1 if (i, j) in self.edges else 0

    def symmetric_pairs(self) -> list:
        """Unordered pairs (i < j) kept if either direction is an edge."""
        return sorted({(min(i, j), max(i, j)) for (i, j) in self.edges})

    def symmetric_adjacency(self) -> sp.csr_matrix:
        """Sparse symmetric matrix of edge lengths (union symmetrization)."""
        pairs = self.symmetric_pairs()
        rows, cols, vals = [], [], []
        for (i, j) in pairs:
            length = self.lengths.get((i, j), self.lengths.get((j, i)))
            rows += [i, j]
            cols += [j, i]
            vals += [length, length]
        return sp.csr_matrix((vals, (rows, cols)), shape=(self.n, self.n))

    def components(self) -> list:
        adj = self.symmetric_adjacency()
        ncomp, labels = connected_components(adj, directed=False)
        return [[int(i) for i in np.flatnonzero(labels == c)] for c in range(ncomp)]

    def is_connected(self) -> bool:
        return len(self.components()) == 1

    def require_connected(self):
        comps = self.components()
        if len(comps) > 1:
            raise DisconnectedGraphError(comps)

    def neighbor_sets(self) -> list:
        """Out-neighbor set of each point."""
        out = [set() for _ in range(self.n)]
        for (i, j) in self.edges:
            out[i].add(j)
        return out


def build_knn_graph(data: Dataset, k: int, mode: str = "all-data") -> NeighborGraph:
    """kNN graph with deterministic lowest-index tie-breaking.

    mode "within-class" restricts each point's candidates to its own class
    and requires labels with every class larger than k.
    """
    n = data.n
    if not 1 <= k < n:
        raise ValueError(f"k must satisfy 1 <= k < n, got k={k}, n={n}")
    if mode not in ("all-data", "within-class"):
        raise ValueError(f"unknown mode {mode!r}")

    d2 = data.squared_distances()
    if mode == "within-class":
        if data.labels is None:
            raise ValueError("within-class mode requires labels")
        groups = data.classes()
        for lab, idx in groups.items():
            if len(idx) <= k:
                raise ValueError(f"class {lab!r} has {len(idx)} points, needs more than k={k}")
        candidate_sets = [groups[data.labels[i]] for i in range(n)]
    else:
        candidate_sets = [range(n)] * n

    edges = set()
    lengths = {}
    for i in range(n):
        cand = np.array([j for j in candidate_sets[i] if j != i])
        # stable sort on distances -> ties broken by lowest index
        order = np.argsort(d2[i, cand], kind="stable")
        for j in cand[order[:k]]:
            j = int(j)
            edges.add((i, j))
            lengths[(i, j)] = float(np.sqrt(d2[i, j]))
    return NeighborGraph(n=n, k=k, edges=frozenset(edges), lengths=lengths)


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric matrix of squared distances."""

    values: np.ndarray
    kind: str  # "euclidean" or "geodesic"

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if not np.allclose(v, v.T):
            raise ValueError("distance matrix must be symmetric")
        if np.any(v < 0) or np.any(np.diag(v) != 0):
            raise ValueError("distances must be nonnegative with zero diagonal")
        object.__setattr__(self, "values", v)


def euclidean_distance_matrix(data: Dataset) -> DistanceMatrix:
    return DistanceMatrix(values=data.squared_distances(), kind="euclidean")


def geodesic_distances(graph: NeighborGraph) -> DistanceMatrix:
    """Squared shortest-path distances over the symmetrized weighted graph."""
    graph.require_connected()
    adj = graph.symmetric_adjacency()
    dist = dijkstra(adj, directed=False)
    d2 = dist ** 2
    d2 = 0.5 * (d2 + d2.T)
    np.fill_diagonal(d2, 0.0)
    return DistanceMatrix(values=d2, kind="geodesic")


def _symmetric_weights(graph: NeighborGraph, weight: str, sigma: float | None):
    """Dense symmetric weight matrix for the union-symmetrized graph."""
    n = graph.n
    W = np.zeros((n, n))
    pairs = graph.symmetric_pairs()
    if weight == "binary":
        for (i, j) in pairs:
            W[i, j] = W[j, i] = 1.0
    elif weight == "rbf":
        if sigma is None:
            lengths = [graph.lengths.get((i, j), graph.lengths.get((j, i))) for (i, j) in pairs]
            sigma = float(np.median(lengths)) if lengths else 1.0
        if sigma <= 0:
            raise ValueError("sigma must be positive")
        for (i, j) in pairs:
            length = graph.lengths.get((i, j), graph.lengths.get((j, i)))
            W[i, j] = W[j, i] = np.exp(-(length ** 2) / (2.0 * sigma ** 2))
    else:
        raise ValueError(f"unknown weight {weight!r}")
    return W


def graph_laplacian(graph: NeighborGraph, weight: str = "binary", sigma: float | None = None):
    """Return (W, L) with L = D - W on the symmetrized graph."""
    W = _symmetric_weights(graph, weight, sigma)
    L = np.diag(W.sum(axis=1)) - W
    return W, L


@dataclass(frozen=True)
class AlignmentMatrix:
    """Symmetric alignment matrix from LLE reconstruction or a diffusion operator."""

    values: np.ndarray
    source: str  # "lle" or "diffusion-operator"


def lle_alignment(data: Dataset, graph: NeighborGraph, reg: float = 1e-3) -> AlignmentMatrix:
    """Alignment matrix M = (I - W)^T (I - W) from local linear reconstruction.

    Each row of W solves the local least squares with weights summing to one
    over the point's k neighbors; the local Gram is regularized by
    reg * trace * I, which is needed whenever k exceeds the input dimension.
    """
    if reg < 0:
        raise ValueError("reg must be nonnegative")
    n = data.n
    X = data.points
    W = np.zeros((n, n))
    for i, nbrs in enumerate(graph.neighbor_sets()):
        idx = sorted(nbrs)
        Z = X[:, idx] - X[:, [i]]
        C = Z.T @ Z
        if reg > 0:
            C = C + reg * max(np.trace(C), np.finfo(float).tiny) * np.eye(len(idx))
        try:
            w = np.linalg.solve(C, np.ones(len(idx)))
        except np.linalg.LinAlgError as exc:
            raise ValueError(f"singular local Gram at point {i}; increase reg") from exc
        s = w.sum()
        if s == 0:
            raise ValueError(f"degenerate reconstruction weights at point {i}")
        W[i, idx] = w / s
    ImW = np.eye(n) - W
    M = ImW.T @ ImW
    return AlignmentMatrix(values=0.5 * (M + M.T), source="lle")


def diffusion_operator(graph: NeighborGraph, sigma: float | None = None,
                       alpha: float = 0.0, t: int = 1) -> AlignmentMatrix:
    """t-th power of the alpha-normalized random-walk transition operator."""
    if t < 1:
        raise ValueError("t must be a positive integer")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    graph.require_connected()
    W = _symmetric_weights(graph, "rbf", sigma)
    deg = W.sum(axis=1)
    if np.any(deg == 0):
        raise ValueError("graph has an isolated node")
    Wa = W / np.outer(deg ** alpha, deg ** alpha) if alpha > 0 else W
    dega = Wa.sum(axis=1)
    M1 = Wa / dega[:, None]
    M = np.linalg.matrix_power(M1, t)
    return AlignmentMatrix(values=M, source="diffusion-operator")
