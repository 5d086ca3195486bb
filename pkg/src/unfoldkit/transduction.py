"""Kernel learning over a finite candidate set by semidefinite programming.

Given candidate kernels K_1..K_m over train+test points and binary labels
on the training block, learn K = sum mu_i K_i with mu >= 0 and tr(K) = c1
minimizing the soft-margin certificate t of the block linear matrix
inequality

    [[ G(K_tr) + tau I,  1 + nu - delta + lambda y ],
     [        .^T,       t - 2 c2 delta^T 1        ]]  >= 0,

where G(K_tr) = diag(y) K_tr diag(y).  The program is solved with the
generic vector barrier method: log barriers on mu, nu, delta >= 0 and a
log-det barrier on the affine LMI.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .kernels import KernelMatrix
from .sdp import (BarrierTerm, SdpInfeasibleError, SolverOptions,
                  barrier_solve, linear_inequality_barrier)


@dataclass(frozen=True)
class TransductionProblem:
    """Candidate kernels over n = n_tr + n_te points, labels on the first
    n_tr (training) block."""

    kernel_set: tuple  # candidate kernels, each n x n symmetric PSD
    labels: np.ndarray  # +-1, length n_tr
    c1: float = field(default=0.0)  # trace target; 0 means "use n"
    c2: float = 1.0
    tau_reg: float = 1e-3

    def __post_init__(self):
        if not self.kernel_set:
            raise ValueError("need at least one candidate kernel")
        n = self.kernel_set[0].shape[0]
        for K in self.kernel_set:
            K = np.asarray(K)
            if K.shape != (n, n):
                raise ValueError("candidate kernels must share one size")
            if not np.allclose(K, K.T, atol=1e-10 * (1 + np.abs(K).max())):
                raise ValueError("candidate kernels must be symmetric")
        y = np.asarray(self.labels)
        if not np.all(np.isin(y, (-1, 1))):
            raise ValueError("labels must be +-1")
        if not 1 <= y.size <= n:
            raise ValueError("need between 1 and n training labels")
        if self.c2 <= 0 or self.tau_reg < 0:
            raise ValueError("c2 must be positive and tau_reg nonnegative")

    @property
    def n(self) -> int:
        return self.kernel_set[0].shape[0]

    @property
    def n_tr(self) -> int:
        return np.asarray(self.labels).size

    @property
    def trace_target(self) -> float:
        return float(self.c1) if self.c1 else float(self.n)


@dataclass
class TransductionResult:
    kernel: KernelMatrix
    weights: np.ndarray  # mu
    certificate: float  # t
    lmi_min_eigenvalue: float
    trace: float
    converged: bool
    newton_iterations: int


def _lmi_coefficients(problem: TransductionProblem):
    """Affine LMI F(x) = F0 + sum x_i Fi over x = (mu, nu, delta, lambda, t)."""
    m = len(problem.kernel_set)
    ntr = problem.n_tr
    y = np.asarray(problem.labels, dtype=float)
    side = ntr + 1
    N = m + 2 * ntr + 2

    F0 = np.zeros((side, side))
    F0[:ntr, :ntr] = problem.tau_reg * np.eye(ntr)
    F0[:ntr, ntr] = 1.0
    F0[ntr, :ntr] = 1.0

    Fs = []
    for K in problem.kernel_set:
        Ktr = np.asarray(K, dtype=float)[:ntr, :ntr]
        Fi = np.zeros((side, side))
        Fi[:ntr, :ntr] = y[:, None] * Ktr * y[None, :]
        Fs.append(Fi)
    for j in range(ntr):  # nu_j
        Fi = np.zeros((side, side))
        Fi[j, ntr] = Fi[ntr, j] = 1.0
        Fs.append(Fi)
    for j in range(ntr):  # delta_j
        Fi = np.zeros((side, side))
        Fi[j, ntr] = Fi[ntr, j] = -1.0
        Fi[ntr, ntr] = -2.0 * problem.c2
        Fs.append(Fi)
    Fi = np.zeros((side, side))  # lambda
    Fi[:ntr, ntr] = Fi[ntr, :ntr] = y
    Fs.append(Fi)
    Fi = np.zeros((side, side))  # t
    Fi[ntr, ntr] = 1.0
    Fs.append(Fi)
    assert len(Fs) == N
    return F0, Fs


def _lmi_barrier(F0: np.ndarray, Fs: list) -> BarrierTerm:
    side = F0.shape[0]

    def assemble(x):
        F = F0.copy()
        for xi, Fi in zip(x, Fs):
            F += xi * Fi
        return F

    def value(x):
        F = assemble(x)
        try:
            L = np.linalg.cholesky(F)
        except np.linalg.LinAlgError:
            return np.inf
        return -2.0 * float(np.sum(np.log(np.diag(L))))

    def gradient(x):
        P = np.linalg.inv(assemble(x))
        return -np.array([np.sum(P * Fi) for Fi in Fs])

    def hessian(x):
        P = np.linalg.inv(assemble(x))
        G = [P @ Fi for Fi in Fs]
        N = len(Fs)
        H = np.empty((N, N))
        for i in range(N):
            for j in range(i, N):
                H[i, j] = H[j, i] = np.sum(G[i] * G[j].T)
        return H

    return BarrierTerm(value, gradient, hessian, theta=float(side))


def _strictly_feasible_start(problem: TransductionProblem) -> np.ndarray:
    m = len(problem.kernel_set)
    ntr = problem.n_tr
    traces = np.array([np.trace(K) for K in problem.kernel_set])
    if np.any(traces <= 0):
        raise SdpInfeasibleError("candidate kernel with nonpositive trace")
    mu0 = np.full(m, problem.trace_target / traces.sum())
    y = np.asarray(problem.labels, dtype=float)
    Ktr = sum(w * np.asarray(K, dtype=float)[:ntr, :ntr]
              for w, K in zip(mu0, problem.kernel_set))
    G = y[:, None] * Ktr * y[None, :] + problem.tau_reg * np.eye(ntr)
    q = np.ones(ntr)  # 1 + nu - delta + lambda y at nu = delta = 1, lambda = 0
    t0 = float(q @ np.linalg.solve(G, q)) + 2.0 * problem.c2 * ntr + 1.0
    return np.concatenate([mu0, np.ones(ntr), np.ones(ntr), [0.0], [t0]])


def solve_transduction_kernel(problem: TransductionProblem,
                              opts: SolverOptions | None = None,
                              t_schedule=(1.0, 20.0, 1e-9)) -> TransductionResult:
    """Learn the certificate-minimizing kernel combination.

    Returns the combined kernel, the weights mu, and the minimized t; the
    LMI is re-checked a posteriori by an eigenvalue evaluation.
    """
    m = len(problem.kernel_set)
    ntr = problem.n_tr
    N = m + 2 * ntr + 2

    e_t = np.zeros(N)
    e_t[-1] = 1.0
    objective = (lambda x: float(x[-1]),
                 lambda x: e_t,
                 lambda x: np.zeros((N, N)))

    barriers = []
    for i in range(m + 2 * ntr):  # mu, nu, delta >= 0
        d = np.zeros(N)
        d[i] = -1.0
        barriers.append(linear_inequality_barrier(d, 0.0))
    F0, Fs = _lmi_coefficients(problem)
    barriers.append(_lmi_barrier(F0, Fs))

    traces = np.array([np.trace(K) for K in problem.kernel_set])
    A = np.zeros((1, N))
    A[0, :m] = traces
    b = np.array([problem.trace_target])

    x0 = _strictly_feasible_start(problem)
    res = barrier_solve(objective, barriers, x0, equalities=(A, b),
                        t_schedule=t_schedule, opts=opts)

    mu = res.x[:m]
    K = sum(w * np.asarray(Ki, dtype=float) for w, Ki in zip(mu, problem.kernel_set))
    K = 0.5 * (K + K.T)
    F = F0.copy()
    for xi, Fi in zip(res.x, Fs):
        F += xi * Fi
    eigs = np.linalg.eigvalsh(F)
    return TransductionResult(
        kernel=KernelMatrix(values=K, method="transduction", centered=False),
        weights=mu, certificate=float(res.x[-1]),
        lmi_min_eigenvalue=float(eigs[0]),
        trace=float(np.trace(K)), converged=res.converged,
        newton_iterations=res.newton_iterations)


def kernel_predict(alphas: np.ndarray, b: float, K_column: np.ndarray) -> float:
    """Kernel expansion score f(x) = sum_i alpha_i k(x_i, x) + b."""
    alphas = np.asarray(alphas, dtype=float)
    K_column = np.asarray(K_column, dtype=float)
    if alphas.shape != K_column.shape:
        raise ValueError("alphas and kernel column lengths differ")
    return float(alphas @ K_column + b)
