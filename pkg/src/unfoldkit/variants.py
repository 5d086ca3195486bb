"""Supervised, action-respecting, relaxed, and landmark unfoldings.

Every variant is an alternative assembly of the same trace-form SDP:
change the constrained pair set, the targets, or the linear objective,
and reuse the solver and the reduced-basis centering elimination.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg

from .data import Dataset
from .graph import AlignmentMatrix, NeighborGraph
from .kernels import KernelMatrix, centering_matrix, delta_kernel
from .mvu import FULL_PAIR_CAP, MvuProblem, assemble_mvu
from .sdp import (LinearExpr, SdpProblem, SdpSolution, SolverOptions,
                  solve_sdp)


@dataclass(frozen=True)
class SupervisedConfig:
    """Knobs of the supervised assemblies.

    ``alpha`` scales the representative separation targets; ``label_kernel``
    is the similarity over labels for the dependence-maximizing variant
    (defaults to the indicator kernel of the hard labels).
    """

    alpha: float = 2.0
    label_kernel: KernelMatrix | None = None

    def __post_init__(self):
        if not self.alpha > 1:
            raise ValueError("alpha must exceed 1")


# ---------------------------------------------------------------------------
# Class representatives and scatter functionals


def class_representatives(data: Dataset) -> dict:
    """Per class, the index of the point closest to the class mean.

    Ties break to the lowest index.
    """
    groups = data.classes()
    reps = {}
    for lab, idx in groups.items():
        mean = data.points[:, idx].mean(axis=1)
        d2 = np.sum((data.points[:, idx] - mean[:, None]) ** 2, axis=0)
        reps[lab] = idx[int(np.argmin(d2))]  # argmin returns first minimum
    return reps


def _within_scatter_matrix(data: Dataset, reps: dict) -> np.ndarray:
    """C_W with sigma_W = tr(C_W K): class-wise mean squared distance to the
    class representative."""
    n = data.n
    C = np.zeros((n, n))
    for lab, idx in data.classes().items():
        if lab not in reps:
            raise ValueError(f"no representative for class {lab!r}")
        c = reps[lab]
        nc = len(idx)
        for i in idx:
            C[i, i] += 1.0 / nc
            C[c, c] += 1.0 / nc
            C[i, c] -= 1.0 / nc
            C[c, i] -= 1.0 / nc
    return C


def _between_scatter_matrix(n: int, reps: dict) -> np.ndarray:
    """C_B with sigma_B = tr(C_B K): squared distances over all ordered
    representative pairs."""
    rep_idx = sorted(reps.values())
    C = np.zeros((n, n))
    nr = len(rep_idx)
    r = np.zeros(n)
    for c in rep_idx:
        C[c, c] += 2.0 * nr
        r[c] += 1.0
    C -= 2.0 * np.outer(r, r)
    return C


def fisher_scatters(K: KernelMatrix, data: Dataset, reps: dict):
    """(sigma_W, sigma_B) of an embedding kernel.

    sigma_W sums, class by class, the mean squared feature distance of the
    class points to the class representative; sigma_B sums the squared
    feature distances over all ordered pairs of representatives.
    """
    if K.n != data.n:
        raise ValueError("kernel size does not match data")
    sw = float(np.sum(_within_scatter_matrix(data, reps) * K.values))
    sb = float(np.sum(_between_scatter_matrix(data.n, reps) * K.values))
    return sw, sb


# ---------------------------------------------------------------------------
# Supervised assemblies


def _require_within_class_graph(data: Dataset, graph: NeighborGraph):
    if data.labels is None:
        raise ValueError("supervised assembly requires labels")
    for (i, j) in graph.edges:
        if data.labels[i] != data.labels[j]:
            raise ValueError(f"graph edge ({i}, {j}) crosses classes; "
                             "build the graph in within-class mode")


def assemble_smvu1(data: Dataset, graph: NeighborGraph,
                   cfg: SupervisedConfig) -> MvuProblem:
    """Class-wise unfolding: within-class isometry plus representative
    separation.

    The objective maximizes the per-class pairwise spread sum(Gamma_c / n_c);
    representatives of consecutive classes, and of each class to the last,
    are pinned at alpha times their input distance.
    """
    _require_within_class_graph(data, graph)
    groups = data.classes()
    if len(groups) < 2:
        raise ValueError("need at least 2 classes")
    reps = class_representatives(data)
    rep_order = [reps[lab] for lab in sorted(groups, key=str)]

    # translate each class rigidly so its representative lands at alpha
    # times its position: within-class distances are untouched and every
    # representative pair is separated by exactly alpha times its input
    # distance, making the shifted configuration a feasible anchor
    X = data.points
    shift = np.zeros_like(X)
    for lab, idx in groups.items():
        shift[:, idx] = (cfg.alpha - 1.0) * X[:, [reps[lab]]]
    shifted = Dataset(points=X + shift, labels=data.labels)

    d2s = shifted.squared_distances()
    extra = {}
    last = rep_order[-1]
    for i in range(len(rep_order) - 1):
        for other in (rep_order[i + 1], last):
            pair = (min(rep_order[i], other), max(rep_order[i], other))
            if pair[0] != pair[1]:
                extra[pair] = d2s[pair]

    n = data.n
    C = np.zeros((n, n))
    for lab, idx in groups.items():
        nc = len(idx)
        ones = np.zeros(n)
        ones[idx] = 1.0
        diag = np.zeros(n)
        diag[idx] = 2.0
        C += np.diag(diag) - (2.0 / nc) * np.outer(ones, ones)
    # the within-class graph is disconnected across classes by design; the
    # representative constraints supply the coupling that bounds the program
    return assemble_mvu(shifted, graph, objective_kernel=C, extra_pairs=extra,
                        require_connected=False)


def assemble_smvu2(data: Dataset, graph: NeighborGraph,
                   reps: dict | None = None) -> MvuProblem:
    """Discriminant unfolding: maximize C * (sigma_B - sigma_W) under the
    same neighborhood isometry as the plain unfolding.

    The graph is the all-data neighbor graph (the constraint set of plain
    unfolding); only the objective is supervised.
    """
    groups = data.classes()
    if len(groups) < 2:
        raise ValueError("need at least 2 classes")
    if reps is None:
        reps = class_representatives(data)
    C_count = len(groups)
    C = C_count * (_between_scatter_matrix(data.n, reps)
                   - _within_scatter_matrix(data, reps))
    return assemble_mvu(data, graph, objective_kernel=C)


def assemble_colored_mvu(data: Dataset, graph: NeighborGraph,
                         label_kernel: KernelMatrix | None = None) -> MvuProblem:
    """Dependence-maximizing unfolding: maximize tr(H K H K_l) under the
    neighborhood isometry constraints.

    With no label kernel given, hard labels get the indicator kernel.
    """
    if label_kernel is None:
        if data.labels is None:
            raise ValueError("need labels or an explicit label kernel")
        label_kernel = delta_kernel(data.labels)
    if label_kernel.n != data.n:
        raise ValueError("label kernel size does not match data")
    H = centering_matrix(data.n)
    C = H @ label_kernel.values @ H
    return assemble_mvu(data, graph, objective_kernel=C)


# ---------------------------------------------------------------------------
# Action-respecting embedding


def assemble_are(data: Dataset, allow_large: bool = False) -> MvuProblem:
    """Full-pair unfolding plus action consistency.

    For steps i and j carrying the same action, the embedded distance of
    points (i, j) must equal that of their successors (i+1, j+1); each such
    constraint is a rank-two equality with target zero.
    """
    if data.actions is None:
        raise ValueError("action-respecting assembly requires actions")
    base = assemble_mvu(data, graph=None, allow_large=allow_large)
    V = base.reduced_basis
    n = data.n

    extra = []
    for i in range(n - 1):
        for j in range(i + 1, n - 1):
            if data.actions[i] != data.actions[j]:
                continue
            u = V[i] - V[j]
            w = V[i + 1] - V[j + 1]
            M = np.outer(u, u) - np.outer(w, w)
            if np.abs(M).max() <= 1e-15:
                continue
            extra.append((LinearExpr(matrix=M), 0.0))
    sdp = SdpProblem(dim=base.sdp.dim, objective=base.sdp.objective,
                     maximize=True,
                     equalities=base.sdp.equalities + tuple(extra))
    return replace(base, sdp=sdp)


# ---------------------------------------------------------------------------
# Relaxed unfolding: short-circuit pruning and conformal rescaling


@dataclass(frozen=True)
class PruneResult:
    graph: NeighborGraph
    deviations: dict  # symmetric pair -> deviation of the input graph
    threshold: float
    removed: tuple  # pruned symmetric pairs
    disconnected: bool  # pruning broke the graph into components


def edge_deviations(graph: NeighborGraph, data: Dataset) -> dict:
    """Deviation of each symmetric edge: mean squared distance of the two
    endpoints' neighbor union to the edge midpoint.

    Edges cutting across folds have neighbors far from their midpoint, so
    they rank far above in-manifold edges.
    """
    X = data.points
    nbrs = graph.neighbor_sets()
    dev = {}
    for (i, j) in graph.symmetric_pairs():
        union = sorted(nbrs[i] | nbrs[j])
        mid = 0.5 * (X[:, i] + X[:, j])
        d2 = np.sum((X[:, union] - mid[:, None]) ** 2, axis=0)
        dev[(i, j)] = float(d2.mean())
    return dev


def prune_short_circuits(graph: NeighborGraph, data: Dataset,
                         threshold: float | None = None,
                         quantile: float | None = None) -> PruneResult:
    """Drop edges whose deviation exceeds a threshold.

    By default the threshold is 10 times the median deviation, a scree-style
    cut; pass ``threshold`` for an absolute value or ``quantile`` to keep
    that fraction of edges.  If pruning disconnects the graph the result is
    still returned, flagged ``disconnected``.
    """
    if threshold is not None and quantile is not None:
        raise ValueError("give at most one of threshold, quantile")
    dev = edge_deviations(graph, data)
    values = np.array(list(dev.values()))
    if quantile is not None:
        if not 0.0 < quantile < 1.0:
            raise ValueError("quantile must lie in (0, 1)")
        cut = float(np.quantile(values, quantile))
    elif threshold is not None:
        if threshold <= 0:
            raise ValueError("threshold must be positive")
        cut = float(threshold)
    else:
        cut = 10.0 * float(np.median(values))

    removed = {p for p, d in dev.items() if d > cut}
    edges = frozenset((i, j) for (i, j) in graph.edges
                      if (min(i, j), max(i, j)) not in removed)
    lengths = {e: graph.lengths[e] for e in edges}
    pruned = NeighborGraph(n=graph.n, k=graph.k, edges=edges, lengths=lengths)
    return PruneResult(graph=pruned, deviations=dev, threshold=cut,
                       removed=tuple(sorted(removed)),
                       disconnected=not pruned.is_connected())


def conformal_targets(graph: NeighborGraph, data: Dataset) -> dict:
    """Isometry targets rescaled by the local scale product s(x_i) s(x_j).

    s(x) is the mean distance of x to its graph neighbors, so regions
    sampled at different densities are unfolded at comparable local scales.
    """
    d2 = data.squared_distances()
    nbrs = graph.neighbor_sets()
    s = np.empty(graph.n)
    for i, out in enumerate(nbrs):
        if not out:
            raise ValueError(f"point {i} has no neighbors")
        s[i] = float(np.sqrt(d2[i, sorted(out)]).mean())
    return {(i, j): d2[i, j] * s[i] * s[j] for (i, j) in graph.symmetric_pairs()}


# ---------------------------------------------------------------------------
# Landmark unfolding


@dataclass(frozen=True)
class LandmarkModel:
    """Landmark kernel plus the reconstruction of everything else from it."""

    landmark_indices: tuple
    Q: np.ndarray  # (n, m), rows of landmarks form the identity
    L: np.ndarray  # (m, m) PSD landmark kernel

    def kernel(self) -> np.ndarray:
        return self.Q @ self.L @ self.Q.T


def select_landmarks(n: int, m: int, seed: int = 0) -> tuple:
    """m distinct indices drawn uniformly, deterministic in the seed."""
    if not 1 <= m <= n:
        raise ValueError(f"need 1 <= m <= n, got m={m}, n={n}")
    rng = np.random.default_rng(seed)
    return tuple(sorted(int(i) for i in rng.choice(n, size=m, replace=False)))


def landmark_Q(M: AlignmentMatrix, landmark_indices) -> np.ndarray:
    """Reconstruction weights of all points from the landmarks.

    Landmark rows are coordinate vectors; the other rows solve the local
    linear reconstruction encoded in the alignment matrix M, partitioned as
    -(M_uu)^-1 M_ul with u the non-landmarks.  M_uu is regularized by
    1e-8 tr(M_uu) I for stability.
    """
    n = M.values.shape[0]
    lm = sorted(set(int(i) for i in landmark_indices))
    if len(lm) != len(tuple(landmark_indices)):
        raise ValueError("landmark indices must be distinct")
    if lm and not (0 <= lm[0] and lm[-1] < n):
        raise ValueError("landmark index out of range")
    other = [i for i in range(n) if i not in set(lm)]
    m = len(lm)
    Q = np.zeros((n, m))
    for col, i in enumerate(lm):
        Q[i, col] = 1.0
    if other:
        Muu = M.values[np.ix_(other, other)]
        Mul = M.values[np.ix_(other, lm)]
        reg = 1e-8 * max(np.trace(Muu), np.finfo(float).tiny)
        try:
            W = np.linalg.solve(Muu + reg * np.eye(len(other)), -Mul)
        except np.linalg.LinAlgError as exc:
            raise ValueError("singular non-landmark block; "
                             "use more landmarks or a denser graph") from exc
        Q[other, :] = W
    return Q


@dataclass(frozen=True)
class LandmarkProblem:
    """Reduced landmark program: variable T with L = B T B^T."""

    landmark_indices: tuple
    Q: np.ndarray
    basis: np.ndarray  # (m, dim) orthonormal, orthogonal to Q^T 1
    sdp: SdpProblem
    pairs: tuple
    targets: np.ndarray
    warm: np.ndarray  # strictly feasible start for T


def assemble_landmark_mvu(data: Dataset, graph: NeighborGraph,
                          Q: np.ndarray,
                          landmark_indices=()) -> LandmarkProblem:
    """Unfolding over the landmark kernel L: maximize tr(Q L Q^T) with the
    neighborhood isometry relaxed to inequalities.

    The centering constraint (sum of Q L Q^T entries zero) pins L q = 0 for
    q = Q^T 1, and is eliminated by the substitution L = B T B^T with B an
    orthonormal basis orthogonal to q; zero-target pairs are eliminated the
    same way so the reduced program has a strictly feasible scaled identity.
    """
    n, m = Q.shape
    if n != data.n:
        raise ValueError("Q row count does not match data")
    graph.require_connected()
    d2 = data.squared_distances()
    pairs = graph.symmetric_pairs()
    scale = max((d2[i, j] for (i, j) in pairs), default=0.0)

    q = Q.T @ np.ones(n)
    rows = [q]
    live = []
    for (i, j) in pairs:
        v = Q.T @ (np.eye(n)[i] - np.eye(n)[j])
        if d2[i, j] <= 1e-12 * max(scale, 1.0):
            rows.append(v)
        else:
            live.append(((i, j), v, d2[i, j]))
    B = scipy.linalg.null_space(np.array(rows))
    if B.shape[1] == 0:
        raise ValueError("no degrees of freedom left after elimination")

    inequalities = []
    kept_pairs, kept_targets = [], []
    ratios = []
    for (i, j), v, target in live:
        w = B.T @ v
        inequalities.append((LinearExpr(vector=w), target))
        kept_pairs.append((i, j))
        kept_targets.append(target)
        wn = float(w @ w)
        if wn > 0:
            ratios.append(target / wn)
    C_T = B.T @ (Q.T @ Q) @ B
    sdp = SdpProblem(dim=B.shape[1], objective=C_T, maximize=True,
                     inequalities=tuple(inequalities))
    delta = 0.5 * min(ratios) if ratios else 1.0
    warm = delta * np.eye(B.shape[1])
    return LandmarkProblem(landmark_indices=tuple(landmark_indices), Q=Q,
                           basis=B, sdp=sdp, pairs=tuple(kept_pairs),
                           targets=np.array(kept_targets), warm=warm)


def solve_landmark_mvu(problem: LandmarkProblem,
                       opts: SolverOptions | None = None):
    """Solve the reduced program; returns the model and the raw solution."""
    sol = solve_sdp(problem.sdp, opts=opts, warm_start=problem.warm)
    L = problem.basis @ sol.S @ problem.basis.T
    L = 0.5 * (L + L.T)
    model = LandmarkModel(landmark_indices=problem.landmark_indices,
                          Q=problem.Q, L=L)
    return model, sol
