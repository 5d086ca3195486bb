"""Maximum variance unfolding: SDP assembly and solve pipeline.

The learned kernel K maximizes tr(K) subject to local isometry
(K_ii + K_jj - 2 K_ij equals the input squared distance on constrained
pairs), centering (sum of all entries zero), and K >= 0.  The centering
constraint is eliminated by substituting K = V S V^T with V an orthonormal
basis of the subspace orthogonal to the all-ones vector: any centered PSD K
is singular (K 1 = 0), so the log-det barrier could never operate on the
full cone, while the reduced variable S can be strictly positive definite.
Duplicate points (zero distance targets) are handled the same way, by
also eliminating the corresponding difference directions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .data import Dataset
from .embedding import Embedding, embed_from_kernel, intrinsic_dimension
from .graph import NeighborGraph
from .kernels import KernelMatrix, centering_matrix
from .sdp import (LinearExpr, SdpProblem, SdpSolution, SolverOptions,
                  check_feasibility, solve_sdp)

FULL_PAIR_CAP = 80


def helmert_basis(n: int) -> np.ndarray:
    """Orthonormal n x (n-1) basis of the subspace orthogonal to the ones vector.

    Column j is (1, ..., 1, -(j+1), 0, ..., 0) / sqrt((j+1)(j+2)).
    """
    if n < 2:
        raise ValueError("need n >= 2")
    V = np.zeros((n, n - 1))
    for j in range(n - 1):
        V[: j + 1, j] = 1.0
        V[j + 1, j] = -(j + 1.0)
        V[:, j] /= np.sqrt((j + 1.0) * (j + 2.0))
    return V


def reduced_basis(n: int, zero_pairs=()) -> np.ndarray:
    """Orthonormal basis orthogonal to 1 and to e_i - e_j for each zero pair.

    With no zero pairs this is the Helmert basis; otherwise the null space
    of the stacked constraint rows, which additionally forces the duplicate
    points onto coincident embeddings.
    """
    zero_pairs = list(zero_pairs)
    if not zero_pairs:
        return helmert_basis(n)
    rows = [np.ones(n)]
    for i, j in zero_pairs:
        r = np.zeros(n)
        r[i], r[j] = 1.0, -1.0
        rows.append(r)
    V = scipy.linalg.null_space(np.array(rows))
    if V.shape[1] == 0:
        raise ValueError("all points coincide; nothing to unfold")
    return V


@dataclass(frozen=True)
class MvuProblem:
    """An assembled unfolding program plus the data to undo the reduction."""

    gram: np.ndarray  # centered Gram HGH, the feasible anchor
    graph: NeighborGraph | None  # None for the full-pair variant
    reduced_basis: np.ndarray  # V with K = V S V^T
    sdp: SdpProblem
    pairs: tuple  # constrained (i, j) pairs, i < j, zero-target pairs removed
    targets: np.ndarray  # squared-distance targets for those pairs
    max_edge_length: float  # tau of the variance bound
    anchor_feasible: bool = True  # targets match the input distances

    @property
    def n(self) -> int:
        return self.reduced_basis.shape[0]


@dataclass
class MvuResult:
    kernel: KernelMatrix
    embedding: Embedding
    objective_trace: float
    constraint_report: dict
    variance_bound: float
    solution: SdpSolution


def _constrained_pairs(data: Dataset, graph: NeighborGraph | None,
                       allow_large: bool, require_connected: bool = True) -> list:
    if graph is not None:
        if graph.n != data.n:
            raise ValueError("graph size does not match data")
        if require_connected:
            graph.require_connected()
        return graph.symmetric_pairs()
    if data.n > FULL_PAIR_CAP and not allow_large:
        raise ValueError(
            f"full-pair program has {data.n * (data.n - 1) // 2} constraints for "
            f"n={data.n}; pass allow_large=True or supply a neighbor graph")
    return [(i, j) for i in range(data.n) for j in range(i + 1, data.n)]


def assemble_mvu(data: Dataset, graph: NeighborGraph | None = None,
                 objective_kernel: np.ndarray | None = None,
                 targets: dict | None = None,
                 extra_pairs: dict | None = None,
                 allow_large: bool = False,
                 require_connected: bool = True) -> MvuProblem:
    """Build the reduced SDP: maximize tr(C K) under isometry on tau pairs.

    ``objective_kernel`` is C in K-space (identity when omitted, giving
    plain trace maximization); ``targets`` optionally overrides the squared
    distance for specific pairs (used by the conformal variant);
    ``extra_pairs`` adds constrained pairs with explicit targets beyond the
    graph edges (used by the supervised representative constraints).
    """
    n = data.n
    d2 = data.squared_distances()
    all_pairs = _constrained_pairs(data, graph, allow_large, require_connected)

    pair_targets = {}
    for (i, j) in all_pairs:
        t = d2[i, j]
        if targets is not None and (i, j) in targets:
            t = float(targets[(i, j)])
        pair_targets[(i, j)] = t
    if extra_pairs is not None:
        for (i, j), t in extra_pairs.items():
            if i == j or not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"bad extra pair ({i}, {j})")
            pair_targets[(min(i, j), max(i, j))] = float(t)

    scale = max(pair_targets.values(), default=0.0)
    zero_pairs = [p for p, t in pair_targets.items() if t <= 1e-12 * max(scale, 1.0)]
    kept = [(p, t) for p, t in sorted(pair_targets.items()) if p not in set(zero_pairs)]
    V = reduced_basis(n, zero_pairs)

    equalities = []
    for (i, j), t in kept:
        u = V[i] - V[j]  # V^T (e_i - e_j)
        equalities.append((LinearExpr(vector=u), t))

    if objective_kernel is None:
        C_s = np.eye(V.shape[1])  # tr(K) = tr(S) for orthonormal V
    else:
        C_s = V.T @ objective_kernel @ V
    sdp = SdpProblem(dim=V.shape[1], objective=C_s, maximize=True,
                     equalities=tuple(equalities))

    H = centering_matrix(n)
    Gc = H @ data.gram() @ H
    if graph is not None:
        tau = max(graph.lengths.values()) if graph.lengths else 0.0
    else:
        tau = float(np.sqrt(d2.max())) if n > 1 else 0.0
    # rescaled targets (conformal) need not be realizable by the input
    # configuration, so the centered Gram stops being a feasible anchor
    anchor_ok = all(abs(t - d2[i, j]) <= 1e-12 * max(scale, 1.0)
                    for (i, j), t in pair_targets.items())
    return MvuProblem(gram=Gc, graph=graph, reduced_basis=V, sdp=sdp,
                      pairs=tuple(p for p, _ in kept),
                      targets=np.array([t for _, t in kept]),
                      max_edge_length=tau, anchor_feasible=anchor_ok)


def warm_start(problem: MvuProblem) -> np.ndarray:
    """Strictly PD start near the feasible anchor: V^T (HGH) V + eps I.

    With rescaled targets the centered Gram is no longer near the feasible
    set, and its near-null directions (rank <= d) cap the feasibility-
    restoring Newton steps at the cone boundary; a well-conditioned multiple
    of the identity at the scale of the targets starts better.
    """
    V = problem.reduced_basis
    if not problem.anchor_feasible:
        norms2 = np.array([float(expr.vector @ expr.vector)
                           for expr, _ in problem.sdp.equalities])
        targets = np.array([b for _, b in problem.sdp.equalities])
        delta = float(np.mean(targets / norms2)) if targets.size else 1.0
        return delta * np.eye(V.shape[1])
    Gc = problem.gram
    eps = 1e-6 * (1.0 + np.trace(Gc) / problem.n)
    return V.T @ Gc @ V + eps * np.eye(V.shape[1])


def constraint_report(problem: MvuProblem, K: np.ndarray) -> dict:
    """Residuals of the original (unreduced) program at kernel K."""
    n = problem.n
    iso = []
    for (i, j), t in zip(problem.pairs, problem.targets):
        iso.append(K[i, i] + K[j, j] - 2.0 * K[i, j] - t)
    iso = np.array(iso) if iso else np.zeros(0)
    eigs = np.linalg.eigvalsh(0.5 * (K + K.T))
    return {
        "isometry_max_residual": float(np.abs(iso).max()) if iso.size else 0.0,
        "centering_residual": float(np.abs(K @ np.ones(n)).max()),
        "min_eigenvalue": float(eigs[0]),
        "max_eigenvalue": float(eigs[-1]),
    }


def solve_mvu(data: Dataset, graph: NeighborGraph | None = None,
              p: int | None = None, opts: SolverOptions | None = None,
              problem: MvuProblem | None = None,
              allow_large: bool = False) -> MvuResult:
    """Assemble (unless given), solve, reconstruct K, and embed.

    The embedding dimension defaults to the spectral-gap estimate on the
    learned kernel.  The centered Gram is feasible for every variant of the
    constraints, so the solved trace must dominate tr(HGH); a violation
    means the solver failed and is raised as an error.
    """
    if problem is None:
        problem = assemble_mvu(data, graph, allow_large=allow_large)
    sol = solve_sdp(problem.sdp, opts=opts, warm_start=warm_start(problem))
    V = problem.reduced_basis
    K = V @ sol.S @ V.T
    K = 0.5 * (K + K.T)

    anchor = float(np.trace(problem.gram))
    trace = float(np.trace(K))
    rank_one_only = all(expr.rank_one for expr, _ in problem.sdp.equalities)
    if problem.sdp.maximize and rank_one_only and problem.anchor_feasible and \
            np.allclose(problem.sdp.objective, np.eye(problem.sdp.dim)):
        if trace < anchor - 1e-5 * max(anchor, 1.0):
            raise RuntimeError(
                f"solver returned tr(K)={trace:.6g} below the feasible anchor "
                f"tr(HGH)={anchor:.6g}")

    kernel = KernelMatrix(values=K, method="mvu", centered=True)
    if p is None:
        spectrum = np.linalg.eigvalsh(K)[::-1]
        p = intrinsic_dimension(spectrum) if np.any(spectrum > 0) else 1
    emb = embed_from_kernel(kernel, p)
    n = problem.n
    bound = 0.5 * n ** 3 * problem.max_edge_length ** 2
    report = constraint_report(problem, K)
    report["solver_equality_residual"] = sol.equality_residual
    report["converged"] = sol.converged
    return MvuResult(kernel=kernel, embedding=emb, objective_trace=trace,
                     constraint_report=report, variance_bound=bound, solution=sol)
