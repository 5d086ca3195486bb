"""Interior-point solver for trace-form semidefinite programs.

The cone is handled with the log-determinant barrier (gradient S^-1,
Hessian action S^-1 U S^-1); linear inequalities get scalar log barriers;
equalities are driven to zero by infeasible-start Newton steps on the KKT
system.  Two execution paths share the outer loop:

* a generic dense path on the vectorized symmetric variable, for small
  problems with arbitrary constraint matrices, and
* a fast path for problems whose constraints are all rank-one
  (tr(u u^T S) = b), where the barrier Hessian is inverted in closed form
  and the multipliers come from a small Schur-complement system.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.optimize


class SdpError(RuntimeError):
    pass


class SdpInfeasibleError(SdpError):
    pass


# ---------------------------------------------------------------------------
# Problem statement


@dataclass(frozen=True)
class LinearExpr:
    """A linear functional tr(A^T S), optionally given by a rank-one factor.

    When ``vector`` v is set, A = v v^T and is never materialized on the
    fast path.
    """

    matrix: np.ndarray | None = None
    vector: np.ndarray | None = None

    def __post_init__(self):
        if (self.matrix is None) == (self.vector is None):
            raise ValueError("exactly one of matrix, vector must be given")
        if self.matrix is not None:
            A = np.asarray(self.matrix, dtype=float)
            if not np.allclose(A, A.T):
                raise ValueError("constraint matrix must be symmetric")
            object.__setattr__(self, "matrix", 0.5 * (A + A.T))
        else:
            object.__setattr__(self, "vector", np.asarray(self.vector, dtype=float))

    @property
    def rank_one(self) -> bool:
        return self.vector is not None

    def full(self) -> np.ndarray:
        if self.matrix is not None:
            return self.matrix
        return np.outer(self.vector, self.vector)

    def value(self, S: np.ndarray) -> float:
        if self.vector is not None:
            return float(self.vector @ S @ self.vector)
        return float(np.sum(self.matrix * S))


@dataclass(frozen=True)
class SdpProblem:
    """maximize/minimize tr(C^T S) over S >= 0 under trace constraints."""

    dim: int
    objective: np.ndarray
    maximize: bool = False
    equalities: tuple = ()  # of (LinearExpr, b)
    inequalities: tuple = ()  # of (LinearExpr, e), meaning tr(D^T S) <= e

    def __post_init__(self):
        C = np.asarray(self.objective, dtype=float)
        if C.shape != (self.dim, self.dim):
            raise ValueError("objective shape mismatch")
        if not np.allclose(C, C.T):
            raise ValueError("objective must be symmetric")
        object.__setattr__(self, "objective", 0.5 * (C + C.T))
        object.__setattr__(self, "equalities", tuple(self.equalities))
        object.__setattr__(self, "inequalities", tuple(self.inequalities))
        for expr, _ in self.equalities + self.inequalities:
            A = expr.matrix if expr.matrix is not None else expr.vector
            if A.shape[0] != self.dim:
                raise ValueError("constraint dimension mismatch")


@dataclass
class SolverOptions:
    t0: float = 1.0
    mu: float = 10.0
    stop_tol: float = 1e-7  # stop when (cone dim + #inequalities) / t < stop_tol
    newton_tol: float = 1e-9  # on the Newton decrement
    eq_tol: float = 1e-10  # relative, on equality residuals
    max_outer: int = 50
    max_inner: int = 100
    alpha: float = 0.3
    beta: float = 0.5
    trace: list | None = None  # appended with one dict per outer iteration


@dataclass
class SdpSolution:
    S: np.ndarray
    objective_value: float
    equality_residual: float
    inequality_residual: float
    barrier_parameter_final: float
    newton_iterations: int
    converged: bool


@dataclass
class FeasibilityReport:
    equality_residuals: np.ndarray
    inequality_residuals: np.ndarray  # max(0, tr(D S) - e)
    min_eigenvalue: float
    tol: float

    @property
    def feasible(self) -> bool:
        worst = 0.0
        if self.equality_residuals.size:
            worst = max(worst, float(np.abs(self.equality_residuals).max()))
        if self.inequality_residuals.size:
            worst = max(worst, float(self.inequality_residuals.max()))
        return worst <= self.tol and self.min_eigenvalue >= -self.tol


def check_feasibility(problem: SdpProblem, S: np.ndarray, tol: float = 1e-8) -> FeasibilityReport:
    S = np.asarray(S, dtype=float)
    if S.shape != (problem.dim, problem.dim):
        raise ValueError("shape mismatch")
    eq = np.array([expr.value(S) - b for expr, b in problem.equalities])
    ineq = np.array([max(0.0, expr.value(S) - e) for expr, e in problem.inequalities])
    min_eig = float(np.linalg.eigvalsh(0.5 * (S + S.T))[0]) if problem.dim else 0.0
    return FeasibilityReport(eq, ineq, min_eig, tol)


# ---------------------------------------------------------------------------
# svec coordinates (off-diagonals scaled by sqrt 2 so dot products are traces)

_SQRT2 = np.sqrt(2.0)


def _svec_indices(m: int):
    I, J = np.triu_indices(m)
    return I, J


def svec(S: np.ndarray) -> np.ndarray:
    m = S.shape[0]
    I, J = _svec_indices(m)
    x = S[I, J].copy()
    x[I != J] *= _SQRT2
    return x


def smat(x: np.ndarray, m: int) -> np.ndarray:
    I, J = _svec_indices(m)
    S = np.zeros((m, m))
    vals = x.copy()
    vals[I != J] /= _SQRT2
    S[I, J] = vals
    S[J, I] = vals
    return S


def _chol_or_none(S: np.ndarray):
    try:
        return np.linalg.cholesky(S)
    except np.linalg.LinAlgError:
        return None


# ---------------------------------------------------------------------------
# Newton step on the equality-constrained KKT system


def newton_equality_step(gradient: np.ndarray, hessian: np.ndarray,
                         A: np.ndarray | None, b: np.ndarray | None,
                         x: np.ndarray):
    """Solve [[H, A^T], [A, 0]] [u; nu] = [-grad; -(Ax - b)].

    The lower block drives the equality residual to zero, so the step is
    valid from equality-infeasible points.  With no constraints (A None or
    empty) this is the plain Newton step.  Returns (u, nu).
    """
    n = x.size
    if A is None or A.size == 0:
        try:
            u = np.linalg.solve(hessian, -gradient)
        except np.linalg.LinAlgError as exc:
            raise SdpError("singular Hessian in Newton step") from exc
        return u, np.zeros(0)
    A = np.atleast_2d(A)
    m = A.shape[0]
    KKT = np.zeros((n + m, n + m))
    KKT[:n, :n] = hessian
    KKT[:n, n:] = A.T
    KKT[n:, :n] = A
    rhs = np.concatenate([-gradient, -(A @ x - np.asarray(b, dtype=float))])
    try:
        sol = np.linalg.solve(KKT, rhs)
    except np.linalg.LinAlgError:
        # rank-deficient constraint sets
        sol, *_ = np.linalg.lstsq(KKT, rhs, rcond=None)
    if not np.all(np.isfinite(sol)):
        raise SdpError("singular KKT matrix (degenerate constraints)")
    return sol[:n], sol[n:]


# ---------------------------------------------------------------------------
# Generic barrier machinery over a vector variable


@dataclass
class BarrierTerm:
    """One smooth barrier: callables for value (inf outside the domain),
    gradient, and Hessian, plus its contribution to the barrier parameter
    used in the stopping rule."""

    value: object
    grad: object
    hess: object
    theta: float = 1.0


def scalar_inequality_barrier(f, grad, hess) -> BarrierTerm:
    """-log(-f(x)) for a smooth scalar constraint f(x) <= 0."""

    def value(x):
        v = f(x)
        return np.inf if v >= 0 else -np.log(-v)

    def gradient(x):
        v = f(x)
        return grad(x) / (-v)

    def hessian(x):
        v = f(x)
        g = grad(x)
        return np.outer(g, g) / v ** 2 + hess(x) / (-v)

    return BarrierTerm(value, gradient, hessian, theta=1.0)


def linear_inequality_barrier(d: np.ndarray, e: float) -> BarrierTerm:
    """-log(e - d.x)."""
    d = np.asarray(d, dtype=float)

    def value(x):
        slack = e - d @ x
        return np.inf if slack <= 0 else -np.log(slack)

    def gradient(x):
        return d / (e - d @ x)

    def hessian(x):
        return np.outer(d, d) / (e - d @ x) ** 2

    return BarrierTerm(value, gradient, hessian, theta=1.0)


def logdet_barrier(m: int) -> BarrierTerm:
    """-log det smat(x) over the svec coordinates of an m x m variable."""
    I, J = _svec_indices(m)
    c = np.where(I == J, 0.5, 1.0 / _SQRT2)

    def value(x):
        L = _chol_or_none(smat(x, m))
        if L is None:
            return np.inf
        return -2.0 * float(np.sum(np.log(np.diag(L))))

    def gradient(x):
        P = np.linalg.inv(smat(x, m))
        return -svec(P)

    def hessian(x):
        P = np.linalg.inv(smat(x, m))
        Pii = P[np.ix_(I, I)]
        return 2.0 * np.outer(c, c) * (Pii * P[np.ix_(J, J)] + P[np.ix_(I, J)] * P[np.ix_(J, I)])

    return BarrierTerm(value, gradient, hessian, theta=float(m))


@dataclass
class CentralPathPoint:
    t: float
    x: np.ndarray
    objective: float
    newton_iterations: int
    converged: bool


@dataclass
class BarrierResult:
    x: np.ndarray
    nu: np.ndarray
    objective: float
    central_path: list
    newton_iterations: int
    converged: bool


def _centering_step(objective_value, objective_grad, objective_hess, barriers,
                    t, A, b, x, nu, opts, stop_value=None):
    """Damped (infeasible-start) Newton to the central point at parameter t.

    Once the equality residual is negligible the line search switches from
    the KKT residual norm (which can force crawling steps on well-behaved
    feasible problems) to an Armijo search on the barrier function value,
    whose descent along the Newton direction is guaranteed.
    """
    normb = 1.0 + (np.abs(b).max() if b is not None and len(b) else 0.0)

    def phi(xx):
        bv = sum(bt.value(xx) for bt in barriers)
        return bv if bv == np.inf else t * float(objective_value(xx)) + bv

    iters = 0
    converged = False
    for _ in range(opts.max_inner):
        g = t * objective_grad(x) + sum(bt.grad(x) for bt in barriers)
        H = t * objective_hess(x) + sum(bt.hess(x) for bt in barriers)
        u, nu_full = newton_equality_step(g, H, A, b, x)
        dnu = nu_full - nu if nu.size else nu_full
        r_pri = (A @ x - b) if A is not None and A.size else np.zeros(0)
        decrement2 = float(u @ H @ u)
        gscale = 1.0 + float(np.linalg.norm(g))
        # the achievable equality residual degrades with the barrier scale
        pri_tol = max(opts.eq_tol * normb, 1e-15 * gscale)
        pri_ok = not r_pri.size or np.abs(r_pri).max() <= pri_tol
        if pri_ok and 0.5 * decrement2 <= opts.newton_tol:
            converged = True
            break

        def resnorm(xx, nn):
            gg = t * objective_grad(xx) + sum(bt.grad(xx) for bt in barriers)
            rd = gg + (A.T @ nn if A is not None and A.size else 0.0)
            rp = (A @ xx - b) if A is not None and A.size else np.zeros(0)
            return np.sqrt(float(np.dot(rd, rd)) + float(np.dot(rp, rp)))

        r0 = resnorm(x, nu if nu.size else np.zeros(len(nu_full)))
        if not nu.size:
            nu = np.zeros(len(nu_full))
            dnu = nu_full
        s = 1.0
        # stay strictly inside every barrier domain
        while s > 1e-14 and not np.isfinite(sum(bt.value(x + s * u) for bt in barriers)):
            s *= opts.beta
        if pri_ok:
            phi0 = phi(x)
            gdot = float(g @ u)
            # the 1e-14 |phi0| slack absorbs float noise of t*f at huge t
            while s > 1e-14 and phi(x + s * u) > phi0 + opts.alpha * s * gdot \
                    + 1e-14 * abs(phi0):
                s *= opts.beta
        else:
            while s > 1e-14 and resnorm(x + s * u, nu + s * dnu) > (1.0 - opts.alpha * s) * r0:
                s *= opts.beta
        if s <= 1e-14:
            # line search exhausted; at extreme t the KKT residual bottoms
            # out at the float64 floor, which is convergence in practice
            converged = pri_ok and r0 <= 1e-7 * gscale
            break
        x = x + s * u
        nu = nu + s * dnu
        iters += 1
        if stop_value is not None and stop_value(x):
            converged = True
            break
    return x, nu, iters, converged


def barrier_solve(objective, barriers, x0, equalities=None,
                  t_schedule=(1.0, 10.0, 1e-7), opts: SolverOptions | None = None,
                  stop_value=None) -> BarrierResult:
    """Follow the central path of  min f(x) + barriers  s.t.  A x = b.

    ``objective`` is a (value, grad, hess) triple of callables; ``barriers``
    a list of BarrierTerm (use scalar_inequality_barrier for smooth f_i <= 0
    constraints).  x0 must be strictly inside every barrier domain.  Stops
    once theta / t drops below the schedule tolerance, with theta the total
    barrier parameter.
    """
    fval, fgrad, fhess = objective
    opts = opts or SolverOptions()
    t0, mu, tol = t_schedule
    A = b = None
    if equalities is not None:
        A, b = equalities
        A = np.atleast_2d(np.asarray(A, dtype=float))
        b = np.atleast_1d(np.asarray(b, dtype=float))
    x = np.asarray(x0, dtype=float).copy()
    if not np.isfinite(sum(bt.value(x) for bt in barriers)):
        raise SdpInfeasibleError("x0 is not strictly feasible for the barriers")
    theta = sum(bt.theta for bt in barriers)
    nu = np.zeros(A.shape[0]) if A is not None else np.zeros(0)
    path = []
    total_iters = 0
    t = t0
    t_centered = 0.0
    stopped_early = False
    stop_reached = False
    for _ in range(opts.max_outer):
        x, nu, iters, conv = _centering_step(fval, fgrad, fhess, barriers, t, A, b,
                                             x, nu, opts, stop_value=stop_value)
        total_iters += iters
        if conv:
            t_centered = t
        path.append(CentralPathPoint(t=t, x=x.copy(), objective=float(fval(x)),
                                     newton_iterations=iters, converged=conv))
        if stop_value is not None and stop_value(x):
            stopped_early = True
            stop_reached = True
            break
        if theta / t < tol:
            stop_reached = True
            break
        t *= mu
    # converged means we reached the schedule's stop criterion with a
    # successfully centered iterate whose gap bound theta/t is within 10x
    # of the requested tolerance; the very last centerings may stall at the
    # float64 floor, in which case a stationary objective across the last
    # outer rounds plus solution-quality feasibility stands in.
    certified = t_centered > 0 and theta / t_centered <= 10.0 * tol
    objs = [pt.objective for pt in path]
    scale = 1.0 + abs(objs[-1]) if objs else 1.0
    stationary = len(objs) >= 3 and max(objs[-3:]) - min(objs[-3:]) <= 1e-6 * scale
    if A is not None and A.size:
        quality = float(np.abs(A @ x - b).max()) <= 1e-6 * (1.0 + np.abs(b).max())
    else:
        quality = True
    converged = stop_reached and (
        stopped_early or theta == 0 or certified or (stationary and quality))
    return BarrierResult(x=x, nu=nu, objective=float(fval(x)), central_path=path,
                         newton_iterations=total_iters, converged=converged)


# ---------------------------------------------------------------------------
# Fast path: all constraints rank-one, no inequalities


def _schur_newton_step(S, U, bvec, nu, t, Cmin, refine=2):
    """Newton step for  min t<Cmin,S> - log det S  s.t.  u_a' S u_a = b_a.

    The barrier Hessian acts as U -> S^-1 U S^-1, so its inverse is applied
    in closed form (Z -> S Z S) and only the multipliers need a solve, with
    the Schur matrix M_ab = (u_a' S u_b)^2.  A couple of iterative-refinement
    passes on the exact KKT residual recover the digits lost to M's
    conditioning when S is near the cone boundary.
    """
    mc = U.shape[1]
    P = np.linalg.inv(S)
    SU = S @ U if mc else U
    r_pri = np.einsum("ik,ik->k", U, SU) - bvec if mc else np.zeros(0)
    R_dual = t * Cmin - P
    if mc:
        R_dual = R_dual + (U * nu) @ U.T
    if not mc:
        dS = -S @ R_dual @ S
        return 0.5 * (dS + dS.T), np.zeros(0), r_pri, R_dual, P
    W = U.T @ SU
    M = W * W
    try:
        Mc = np.linalg.cholesky(M + (1e-14 * np.trace(M) / mc) * np.eye(mc))
    except np.linalg.LinAlgError:
        Mc = None
    dS = np.zeros_like(S)
    dnu = np.zeros(mc)
    for _ in range(refine + 1):
        rd = -R_dual - (P @ dS @ P + (U * dnu) @ U.T)
        rp = -r_pri - np.einsum("ik,ik->k", U, dS @ U)
        F = S @ rd @ S
        w = np.einsum("ik,ik->k", U, F @ U) - rp
        if Mc is not None:
            ddnu = np.linalg.solve(Mc.T, np.linalg.solve(Mc, w))
        else:
            ddnu, *_ = np.linalg.lstsq(M, w, rcond=None)
        dS = dS + F - (SU * ddnu) @ SU.T
        dS = 0.5 * (dS + dS.T)
        dnu = dnu + ddnu
    return dS, dnu, r_pri, R_dual, P


def _certified_gap(S, R_dual, t, m):
    """Duality-gap estimate from the multiplier iterate.

    y = -nu/t is dual feasible when Z = (S^-1 + R_dual)/t >= 0, making the
    gap at S exactly <Z, S> = (m + <R_dual, S>)/t.  A slightly indefinite Z
    is charged for at twice its negative eigenvalue times tr(S), so the
    returned value is a certificate when Z >= 0 and a close estimate
    otherwise.
    """
    Z = np.linalg.inv(S) + R_dual
    lam_min = float(np.linalg.eigvalsh(0.5 * (Z + Z.T))[0])
    slack = max(0.0, -lam_min)
    return (m + float(np.sum(R_dual * S)) + 2.0 * slack * float(np.trace(S))) / t


def _solve_rank_one(problem: SdpProblem, S0: np.ndarray, opts: SolverOptions) -> SdpSolution:
    m = problem.dim
    sign = -1.0 if problem.maximize else 1.0
    C = sign * problem.objective
    U = np.column_stack([expr.vector for expr, _ in problem.equalities]) \
        if problem.equalities else np.zeros((m, 0))
    bvec = np.array([b for _, b in problem.equalities])
    mc = U.shape[1]
    normb = 1.0 + (np.abs(bvec).max() if mc else 0.0)

    def barrier_val(S, t):
        L = _chol_or_none(S)
        if L is None:
            return np.inf
        return t * float(np.sum(C * S)) - 2.0 * float(np.sum(np.log(np.diag(L))))

    S = 0.5 * (S0 + S0.T)
    if _chol_or_none(S) is None:
        raise SdpInfeasibleError("warm start is not positive definite")
    nu = np.zeros(mc)
    # scale the initial barrier parameter to the starting objective: with
    # t0 = m / |<C, S0>| the first center is within reach of the warm start,
    # and the unfolding work is spread across the t stages instead of landing
    # entirely in the first centering (whose cost grows like t * objective
    # movement)
    t = min(opts.t0, m / (1.0 + abs(float(np.sum(C * S)))))
    total_iters = 0
    t_centered = 0.0
    stop_reached = False
    obj_hist = []
    for _ in range(opts.max_outer):
        inner_conv = False
        stalls = 0
        for _ in range(opts.max_inner):
            dS, dnu, r_pri, R_dual, P = _schur_newton_step(S, U, bvec, nu, t, C)
            Y = np.linalg.solve(S, dS)
            decrement2 = float(np.sum(Y * Y.T))
            gscale = 1.0 + t * np.linalg.norm(C) + np.linalg.norm(P)
            pri_tol = max(opts.eq_tol * normb, 1e-15 * gscale)
            pri_ok = (not mc) or np.abs(r_pri).max() <= pri_tol
            if pri_ok and 0.5 * decrement2 <= opts.newton_tol:
                inner_conv = True
                break
            pri_now = float(np.abs(r_pri).max()) if mc else 0.0
            if pri_now <= 1e-8 * normb and 0.5 * decrement2 <= 0.25:
                # inside the Newton quadratic region with solution-quality
                # feasibility: a certified duality gap at the level the
                # schedule will deliver ends this centering.  The decrement
                # condition matters: far from the path the gap estimate is
                # loose enough to pass at small t and would skip the
                # centering work entirely
                gap = _certified_gap(S, R_dual, t, m)
                if gap <= 2.0 * m / t:
                    inner_conv = True
                    break
            # exact-penalty merit line search,
            # phi = barrier + kappa * l1 equality residual.  kappa just
            # above gdot / l1 makes the Newton direction a descent
            # direction for phi even when the feasibility-restoring
            # component raises the barrier value, while staying far below
            # the multiplier magnitudes, which are inflated by near-null
            # constraint directions on degenerate programs.  The refined
            # step satisfies A dS = -r to working precision, so residuals
            # along it scale by 1 - s; that prediction keeps the penalty
            # term free of the float-noise floor a re-measured residual
            # would have at large t, and makes the merit valid at any
            # infeasibility level (not just near the constraint set).
            l1_0 = float(np.abs(r_pri).sum()) if mc else 0.0
            gdot = float(np.sum((t * C - P) * dS))
            kappa = 1.0 if gdot <= 0 or l1_0 == 0 else 1.0 + 2.0 * gdot / l1_0

            def merit(S_try, s):
                bv = barrier_val(S_try, t)
                return bv if bv == np.inf else bv + kappa * (1.0 - s) * l1_0
            phi0 = barrier_val(S, t) + kappa * l1_0
            descent = gdot - kappa * l1_0
            s = 1.0
            while s > 1e-14 and merit(S + s * dS, s) > phi0 + opts.alpha * s * descent:
                s *= opts.beta
            if s > 1e-14:
                phin = merit(S + s * dS, s)
                if phi0 - phin <= 1e-13 * (1.0 + abs(phi0)):
                    stalls += 1
                else:
                    stalls = 0
            if s <= 1e-14 or stalls >= 2:
                # float64 floor; a dual certificate can still validate this
                # iterate as centered enough
                if s > 1e-14:
                    S, nu = S + s * dS, nu + s * dnu
                Rc = t * C - np.linalg.inv(S) + ((U * nu) @ U.T if mc else 0.0)
                rp_now = float(np.abs(np.einsum("ik,ik->k", U, S @ U) - bvec).max()) if mc else 0.0
                gap = _certified_gap(S, Rc, t, m)
                inner_conv = rp_now <= 1e-7 * normb and gap <= 10.0 * m / t
                break
            S = S + s * dS
            nu = nu + s * dnu
            total_iters += 1
        if inner_conv:
            t_centered = t
        obj_hist.append(float(np.sum(problem.objective * S)))
        obj = obj_hist[-1]
        if opts.trace is not None:
            res = float(np.abs(np.einsum("ik,ik->k", U, S @ U) - bvec).max()) if mc else 0.0
            opts.trace.append({"t": t, "objective": obj, "equality_residual": res,
                               "inequality_residual": 0.0, "centered": inner_conv})
        if m / t < opts.stop_tol:
            stop_reached = True
            break
        t *= opts.mu
        # the centered multipliers scale linearly with t, so rescaling keeps
        # the warm iterate dual-certifiable at the new barrier parameter
        nu = opts.mu * nu
    eq_res = float(np.abs(np.einsum("ik,ik->k", U, S @ U) - bvec).max()) if mc else 0.0
    # converged: the t-schedule ran to its stop criterion and the returned
    # point is solution-quality feasible, with either a centering certified
    # near the end of the schedule or (on degenerate boundary optima, where
    # float64 cannot certify) an objective stationary across outer rounds
    certified = t_centered > 0 and m / t_centered <= 10.0 * opts.stop_tol
    scale = 1.0 + abs(obj_hist[-1]) if obj_hist else 1.0
    stationary = len(obj_hist) >= 3 and \
        max(obj_hist[-3:]) - min(obj_hist[-3:]) <= 1e-6 * scale
    quality = eq_res <= 1e-6 * normb
    converged = stop_reached and quality and (certified or stationary)
    return SdpSolution(S=S, objective_value=float(np.sum(problem.objective * S)),
                       equality_residual=eq_res, inequality_residual=0.0,
                       barrier_parameter_final=t, newton_iterations=total_iters,
                       converged=converged)


# ---------------------------------------------------------------------------
# Fast path: all constraints rank-one inequalities, no equalities


def _ineq_newton_step(S, W, bvec, t, Cmin, refine=2):
    """Newton step for  min t<Cmin,S> - log det S - sum log(b_a - w_a' S w_a).

    The Hessian is the log-det part plus a rank-one term per inequality, so
    its inverse is applied by the Woodbury identity: the log-det inverse is
    closed-form (Z -> S Z S) and the correction solves the small system
    M = diag(slack^2) + (W' S W)^2.  Iterative refinement on the exact
    residual recovers digits lost to M's conditioning near the boundary.
    """
    k = W.shape[1]
    P = np.linalg.inv(S)
    SW = S @ W
    slack = bvec - np.einsum("ik,ik->k", W, SW)
    G = t * Cmin - P + (W / slack) @ W.T
    N = W.T @ SW
    M = N * N + np.diag(slack * slack)
    try:
        Mc = np.linalg.cholesky(M + (1e-14 * np.trace(M) / k) * np.eye(k))
    except np.linalg.LinAlgError:
        Mc = None
    dS = np.zeros_like(S)
    for _ in range(refine + 1):
        q = np.einsum("ik,ik->k", W, dS @ W)
        R = -G - (P @ dS @ P + (W * (q / slack ** 2)) @ W.T)
        F = S @ R @ S
        c = np.einsum("ik,ik->k", W, F @ W)
        if Mc is not None:
            y = np.linalg.solve(Mc.T, np.linalg.solve(Mc, c))
        else:
            y, *_ = np.linalg.lstsq(M, c, rcond=None)
        dS = dS + F - (SW * y) @ SW.T
        dS = 0.5 * (dS + dS.T)
    return dS, G, P, slack


def _ineq_certified_gap(S, W, bvec, slack, t, Cmin):
    """Duality gap from the central-path multiplier estimate lam_a = 1/(t s_a).

    Z = Cmin + sum lam_a w_a w_a' is dual feasible when PSD; the gap is then
    <Cmin, S> + lam . b.  A slightly indefinite Z is charged at twice its
    negative eigenvalue times tr(S)."""
    lam = 1.0 / (t * slack)
    Z = Cmin + (W * lam) @ W.T
    lam_min = float(np.linalg.eigvalsh(0.5 * (Z + Z.T))[0])
    penalty = 2.0 * max(0.0, -lam_min) * float(np.trace(S))
    return float(np.sum(Cmin * S)) + float(lam @ bvec) + penalty


def _nnls_dual_gap(S, W, bvec, Cmin):
    """Duality gap from multipliers fit by nonnegative least squares.

    At an optimum the dual slack Z = Cmin + sum lam_a w_a w_a' satisfies
    complementarity Z S = 0, so fitting lam >= 0 to minimize ||Z S||_F gives
    a usable dual point even when the central-path estimate 1/(t s_a) blows
    up on weakly active constraints.  The gap bound is valid for any
    lam >= 0 after charging an indefinite Z as in _ineq_certified_gap."""
    n, k = W.shape[0], W.shape[1]
    cols = np.empty((n * n, k))
    for a in range(k):
        wa = W[:, a]
        cols[:, a] = (np.outer(wa, wa) @ S).ravel()
    try:
        lam, _ = scipy.optimize.nnls(cols, -(Cmin @ S).ravel())
    except (RuntimeError, ValueError):
        return np.inf
    Z = Cmin + (W * lam) @ W.T
    lam_min = float(np.linalg.eigvalsh(0.5 * (Z + Z.T))[0])
    penalty = 2.0 * max(0.0, -lam_min) * float(np.trace(S))
    return float(np.sum(Cmin * S)) + float(lam @ bvec) + penalty


def _polish_active_set(problem, S, W, bvec, Cmin, opts):
    """Re-solve the near-active inequalities as equalities from the barrier
    iterate (standard interior-point polishing).

    The barrier objective creeps once float64 can no longer center near a
    rank-deficient optimum; pinning the active set and running the equality
    fast path recovers the remaining digits.  The polished point is adopted
    only if it stays feasible for the inactive inequalities and does not
    worsen the objective.  Returns (S, solution-or-None).
    """
    slack = bvec - np.einsum("ik,ik->k", W, S @ W)
    active = slack <= 1e-4 * (1.0 + np.abs(bvec))
    if not active.any():
        return S, None
    eqs = tuple((LinearExpr(vector=W[:, a]), float(bvec[a]))
                for a in np.flatnonzero(active))
    sub = SdpProblem(dim=problem.dim, objective=problem.objective,
                     maximize=problem.maximize, equalities=eqs)
    try:
        pol = _solve_rank_one(sub, S + 1e-12 * np.trace(S) * np.eye(S.shape[0]), opts)
    except SdpError:
        return S, None
    resid = np.einsum("ik,ik->k", W, pol.S @ W) - bvec
    tol = 1e-8 * (1.0 + np.abs(bvec).max())
    if resid.max() > tol:
        return S, None
    if np.sum(Cmin * pol.S) > np.sum(Cmin * S):
        return S, None
    return pol.S, pol


def _solve_rank_one_ineq(problem: SdpProblem, S0: np.ndarray, opts: SolverOptions) -> SdpSolution:
    m = problem.dim
    sign = -1.0 if problem.maximize else 1.0
    Cmin = sign * problem.objective
    W = np.column_stack([expr.vector for expr, _ in problem.inequalities])
    bvec = np.array([e for _, e in problem.inequalities])
    k = W.shape[1]
    theta = float(m + k)

    def phi(S, t):
        L = _chol_or_none(S)
        if L is None:
            return np.inf
        slack = bvec - np.einsum("ik,ik->k", W, S @ W)
        if np.any(slack <= 0):
            return np.inf
        return t * float(np.sum(Cmin * S)) \
            - 2.0 * float(np.sum(np.log(np.diag(L)))) \
            - float(np.sum(np.log(slack)))

    S = 0.5 * (S0 + S0.T)
    if not np.isfinite(phi(S, 1.0)):
        raise SdpInfeasibleError("warm start is not strictly feasible")
    # first center within reach of the warm start (see _solve_rank_one)
    t = min(opts.t0, theta / (1.0 + abs(float(np.sum(Cmin * S)))))
    total_iters = 0
    t_centered = 0.0
    stop_reached = False
    obj_hist = []
    for outer in range(opts.max_outer):
        inner_conv = False
        # the first centering may traverse a long barrier valley from the
        # warm start (full steps, near-constant decrement), so it gets a
        # larger budget; later stages start near the path and stay cheap
        cap = max(opts.max_inner, 4000) if outer == 0 else opts.max_inner
        for _ in range(cap):
            dS, G, P, slack = _ineq_newton_step(S, W, bvec, t, Cmin)
            q = np.einsum("ik,ik->k", W, dS @ W)
            HdS = P @ dS @ P + (W * (q / slack ** 2)) @ W.T
            decrement2 = float(np.sum(dS * HdS))
            if 0.5 * decrement2 <= opts.newton_tol:
                inner_conv = True
                break
            if 0.5 * decrement2 <= 0.25:
                gap = _ineq_certified_gap(S, W, bvec, slack, t, Cmin)
                if gap <= 2.0 * theta / t:
                    inner_conv = True
                    break
            gdot = float(np.sum(G * dS))
            phi0 = phi(S, t)
            s = 1.0
            if gdot < 0:
                while s > 1e-14 and \
                        phi(S + s * dS, t) > phi0 + opts.alpha * s * gdot \
                        + 1e-14 * abs(phi0):
                    s *= opts.beta
            else:
                # corrupted direction (ill-conditioned solve); certify instead
                s = 0.0
            if s <= 1e-14:
                gap = _ineq_certified_gap(S, W, bvec, slack, t, Cmin)
                inner_conv = gap <= 10.0 * theta / t
                break
            S = S + s * dS
            total_iters += 1
        if inner_conv:
            t_centered = t
        obj_hist.append(float(np.sum(problem.objective * S)))
        if opts.trace is not None:
            opts.trace.append({"t": t, "objective": obj_hist[-1],
                               "equality_residual": 0.0,
                               "inequality_residual": 0.0,
                               "centered": inner_conv})
        if theta / t < opts.stop_tol:
            stop_reached = True
            break
        t *= opts.mu
    S, polished = _polish_active_set(problem, S, W, bvec, Cmin, opts)
    total_iters += polished.newton_iterations if polished else 0
    certified = (polished is not None and polished.converged) or (
        t_centered > 0 and theta / t_centered <= 10.0 * opts.stop_tol)
    scale = 1.0 + abs(obj_hist[-1]) if obj_hist else 1.0
    stationary = len(obj_hist) >= 3 and \
        max(obj_hist[-3:]) - min(obj_hist[-3:]) <= 1e-6 * scale
    slack = bvec - np.einsum("ik,ik->k", W, S @ W)
    # a stationary objective alone can mask a stalled far-from-optimal
    # iterate; demand a small estimated duality gap as well
    final_gap = min(
        _ineq_certified_gap(S, W, bvec, np.maximum(slack, 1e-300), t, Cmin),
        _nnls_dual_gap(S, W, bvec, Cmin))
    converged = stop_reached and (
        certified or (stationary and abs(final_gap) <= 1e-5 * scale))
    return SdpSolution(S=S, objective_value=float(np.sum(problem.objective * S)),
                       equality_residual=0.0,
                       inequality_residual=float(max(0.0, -slack.min())),
                       barrier_parameter_final=t,
                       newton_iterations=total_iters, converged=converged)


# ---------------------------------------------------------------------------
# Generic path


def _phase_one(m, A_ineq, e_ineq, opts) -> np.ndarray:
    """Find x with strict slack in every linear inequality (cone start is I).

    Minimizes a scalar slack s over (x, s) with barriers
    -log det smat(x) and -log(s + e_j - d_j.x); succeeds once s < 0.
    """
    N = m * (m + 1) // 2
    x0 = np.concatenate([svec(np.eye(m)), [0.0]])
    viol = A_ineq @ x0[:N] - e_ineq
    x0[-1] = viol.max() + 1.0

    logdet = logdet_barrier(m)
    barriers = [BarrierTerm(lambda z, bt=logdet: bt.value(z[:N]),
                            lambda z, bt=logdet: np.concatenate([bt.grad(z[:N]), [0.0]]),
                            lambda z, bt=logdet: scipy.linalg.block_diag(bt.hess(z[:N]), 0.0),
                            theta=float(m))]
    for d, e in zip(A_ineq, e_ineq):
        dz = np.concatenate([d, [-1.0]])
        barriers.append(linear_inequality_barrier(dz, e))
    c = np.zeros(N + 1)
    c[-1] = 1.0
    objective = (lambda z: float(c @ z), lambda z: c, lambda z: np.zeros((N + 1, N + 1)))
    res = barrier_solve(objective, barriers, x0, equalities=None,
                        t_schedule=(opts.t0, opts.mu, opts.stop_tol), opts=opts,
                        stop_value=lambda z: z[-1] < -1e-8)
    if res.x[-1] >= 0:
        raise SdpInfeasibleError("Phase-I could not find a strictly feasible point")
    return res.x[:N]


def _solve_generic(problem: SdpProblem, S0: np.ndarray | None, opts: SolverOptions) -> SdpSolution:
    m = problem.dim
    N = m * (m + 1) // 2
    sign = -1.0 if problem.maximize else 1.0
    c = svec(sign * problem.objective)

    A_eq = np.array([svec(expr.full()) for expr, _ in problem.equalities]).reshape(-1, N)
    b_eq = np.array([b for _, b in problem.equalities])
    A_ineq = np.array([svec(expr.full()) for expr, _ in problem.inequalities]).reshape(-1, N)
    e_ineq = np.array([e for _, e in problem.inequalities])

    if S0 is not None:
        x = svec(0.5 * (S0 + S0.T))
        if _chol_or_none(smat(x, m)) is None:
            raise SdpInfeasibleError("warm start is not positive definite")
        if len(e_ineq) and np.any(A_ineq @ x >= e_ineq):
            raise SdpInfeasibleError("warm start violates a strict inequality")
    else:
        x = None
        for delta in (1.0, 0.1, 1e-2, 1e-3, 1e-4):
            cand = svec(delta * np.eye(m))
            if not len(e_ineq) or np.all(A_ineq @ cand < e_ineq - 1e-12):
                x = cand
                break
        if x is None:
            x = _phase_one(m, A_ineq, e_ineq, opts)

    barriers = [logdet_barrier(m)]
    for d, e in zip(A_ineq, e_ineq):
        barriers.append(linear_inequality_barrier(d, e))
    objective = (lambda z: float(c @ z), lambda z: c, lambda z: np.zeros((N, N)))
    equalities = (A_eq, b_eq) if len(b_eq) else None

    res = barrier_solve(objective, barriers, x, equalities=equalities,
                        t_schedule=(opts.t0, opts.mu, opts.stop_tol), opts=opts)
    S = smat(res.x, m)
    report = check_feasibility(problem, S, tol=np.inf)
    eq_res = float(np.abs(report.equality_residuals).max()) if len(b_eq) else 0.0
    ineq_res = float(report.inequality_residuals.max()) if len(e_ineq) else 0.0
    if opts.trace is not None:
        for pt in res.central_path:
            Sp = smat(pt.x, m)
            rp = check_feasibility(problem, Sp, tol=np.inf)
            opts.trace.append({
                "t": pt.t,
                "objective": float(np.sum(problem.objective * Sp)),
                "equality_residual": float(np.abs(rp.equality_residuals).max()) if len(b_eq) else 0.0,
                "inequality_residual": float(rp.inequality_residuals.max()) if len(e_ineq) else 0.0,
            })
    return SdpSolution(S=S, objective_value=float(np.sum(problem.objective * S)),
                       equality_residual=eq_res, inequality_residual=ineq_res,
                       barrier_parameter_final=res.central_path[-1].t if res.central_path else opts.t0,
                       newton_iterations=res.newton_iterations, converged=res.converged)


def solve_sdp(problem: SdpProblem, opts: SolverOptions | None = None,
              warm_start: np.ndarray | None = None) -> SdpSolution:
    """Solve the SDP by the barrier method.

    Dispatches to the Schur-complement fast path when every equality is
    rank-one and there are no inequalities; otherwise uses the dense path
    on svec coordinates.  ``warm_start`` must be strictly positive definite
    (and strictly inside the inequalities); without one, a scaled identity
    or a Phase-I search provides the start.
    """
    opts = opts or SolverOptions()
    if not problem.inequalities and \
            all(expr.rank_one for expr, _ in problem.equalities):
        S0 = warm_start if warm_start is not None else np.eye(problem.dim)
        return _solve_rank_one(problem, np.asarray(S0, dtype=float), opts)
    if not problem.equalities and problem.inequalities and \
            all(expr.rank_one for expr, _ in problem.inequalities):
        S0 = _strict_ineq_start(problem, warm_start)
        if S0 is not None:
            return _solve_rank_one_ineq(problem, S0, opts)
    return _solve_generic(problem, warm_start, opts)


def _strict_ineq_start(problem: SdpProblem, warm_start) -> np.ndarray | None:
    """Strictly feasible start for the inequality fast path, or None."""
    W = np.column_stack([expr.vector for expr, _ in problem.inequalities])
    bvec = np.array([e for _, e in problem.inequalities])

    def strict(S):
        if _chol_or_none(S) is None:
            return False
        return bool(np.all(np.einsum("ik,ik->k", W, S @ W) < bvec - 1e-12))

    if warm_start is not None:
        S0 = 0.5 * (np.asarray(warm_start, dtype=float) + np.asarray(warm_start, dtype=float).T)
        if strict(S0):
            return S0
        return None
    for delta in (1.0, 0.1, 1e-2, 1e-3, 1e-4):
        S0 = delta * np.eye(problem.dim)
        if strict(S0):
            return S0
    return None
