"""Interior-point SDP solver: Newton steps, barrier path, cone handling."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from unfoldkit.sdp import (LinearExpr, SdpInfeasibleError,
                           SdpProblem, SolverOptions, barrier_solve,
                           check_feasibility, linear_inequality_barrier,
                           newton_equality_step, smat, solve_sdp, svec)


def random_psd_with_unit_trace(rng, m):
    B = rng.normal(size=(m, m))
    S = B @ B.T
    return S / np.trace(S)


def refined_random_search(objective, project, rng, m, rounds=8, batch=2000):
    """Coarse-to-fine random search over the feasible set.

    ``project`` maps an arbitrary symmetric matrix into the feasible set;
    each round samples around the incumbent with a shrinking radius.
    """
    best = project(random_psd_with_unit_trace(rng, m))
    best_val = objective(best)
    radius = 1.0
    for _ in range(rounds):
        for _ in range(batch):
            P = rng.normal(size=(m, m)) * radius
            cand = project(best + 0.5 * (P + P.T))
            if cand is None:
                continue
            val = objective(cand)
            if val < best_val:
                best, best_val = cand, val
        radius *= 0.4
    return best_val


class TestNewtonEqualityStep:
    def test_feasible_point_projects_gradient(self):
        x = np.array([1.0, -1.0])
        u, nu = newton_equality_step(x, np.eye(2), np.array([[1.0, 1.0]]),
                                     np.array([0.0]), x)
        np.testing.assert_allclose(u, [-1.0, 1.0], atol=1e-12)
        np.testing.assert_allclose(nu, [0.0], atol=1e-12)

    def test_optimal_point_yields_zero_step(self):
        # minimize ||x||^2 on x1 = 1: optimum (1, 0), gradient (1, 0)
        x = np.array([1.0, 0.0])
        u, _ = newton_equality_step(x, np.eye(2), np.array([[1.0, 0.0]]),
                                    np.array([1.0]), x)
        np.testing.assert_allclose(u, 0.0, atol=1e-12)

    def test_infeasible_start_restores_equality(self):
        x = np.array([0.0, 0.0])
        u, _ = newton_equality_step(x, np.eye(2), np.array([[1.0, 0.0]]),
                                    np.array([1.0]), x)
        np.testing.assert_allclose(u, [1.0, 0.0], atol=1e-12)

    def test_unconstrained_newton(self):
        u, nu = newton_equality_step(np.array([2.0]), np.eye(1), None, None,
                                     np.array([0.0]))
        np.testing.assert_allclose(u, [-2.0])
        assert nu.size == 0


class TestBarrierSolve:
    def linear_objective(self):
        return (lambda x: x[0],
                lambda x: np.array([1.0]),
                lambda x: np.zeros((1, 1)))

    def test_central_path_point_at_t_10(self):
        res = barrier_solve(self.linear_objective(),
                            [linear_inequality_barrier(np.array([-1.0]), 0.0)],
                            np.array([1.0]), t_schedule=(10.0, 10.0, 0.2))
        assert res.x[0] == pytest.approx(0.1, rel=1e-6)

    def test_large_t_pins_to_boundary(self):
        res = barrier_solve(self.linear_objective(),
                            [linear_inequality_barrier(np.array([-1.0]), 0.0)],
                            np.array([1.0]), t_schedule=(1.0, 10.0, 1e-8))
        assert res.converged
        assert 0.0 < res.x[0] <= 1e-7

    def test_inactive_constraint_reaches_unconstrained_optimum(self):
        # minimize (x - 3)^2 with x <= 10 barely matters
        obj = (lambda x: (x[0] - 3.0) ** 2,
               lambda x: np.array([2.0 * (x[0] - 3.0)]),
               lambda x: np.array([[2.0]]))
        res = barrier_solve(obj,
                            [linear_inequality_barrier(np.array([1.0]), 10.0)],
                            np.array([0.0]), t_schedule=(1.0, 10.0, 1e-8))
        assert res.x[0] == pytest.approx(3.0, abs=1e-6)

    def test_infeasible_x0_rejected(self):
        with pytest.raises(SdpInfeasibleError):
            barrier_solve(self.linear_objective(),
                          [linear_inequality_barrier(np.array([-1.0]), 0.0)],
                          np.array([-1.0]))


class TestSolveSdp:
    def test_min_eigenvalue_instance(self):
        prob = SdpProblem(dim=2, objective=np.diag([1.0, 3.0]),
                          equalities=((LinearExpr(matrix=np.eye(2)), 1.0),))
        sol = solve_sdp(prob)
        assert sol.converged
        assert sol.objective_value == pytest.approx(1.0, abs=1e-6)
        np.testing.assert_allclose(sol.S, np.diag([1.0, 0.0]), atol=1e-5)

    def test_scalar_trace_cap(self):
        prob = SdpProblem(dim=1, objective=np.eye(1), maximize=True,
                          inequalities=((LinearExpr(matrix=np.eye(1)), 1.0),))
        sol = solve_sdp(prob)
        assert sol.converged
        assert sol.objective_value == pytest.approx(1.0, abs=1e-6)

    def test_rank_one_equality_fast_path(self):
        # maximize tr(S) with u'Su = 2 for u = e0 - e1: optimum unbounded in
        # the orthogonal direction is prevented by a second pin
        u = np.array([1.0, -1.0])
        v = np.array([1.0, 1.0])
        prob = SdpProblem(dim=2, objective=np.eye(2), maximize=False,
                          equalities=((LinearExpr(vector=u), 2.0),
                                      (LinearExpr(vector=v), 2.0)))
        sol = solve_sdp(prob)
        assert sol.converged
        # u'Su + v'Su = 2 tr(S) exactly for this orthogonal pair
        assert sol.objective_value == pytest.approx(2.0, abs=1e-6)

    def test_monotone_outer_objective(self):
        trace = []
        prob = SdpProblem(dim=3, objective=np.diag([1.0, 2.0, 3.0]),
                          equalities=((LinearExpr(matrix=np.eye(3)), 1.0),))
        sol = solve_sdp(prob, opts=SolverOptions(trace=trace))
        assert sol.converged
        objs = [pt["objective"] for pt in trace]
        for a, b in zip(objs, objs[1:]):
            assert b <= a + 1e-6

    def test_solution_stays_in_cone(self):
        rng = np.random.default_rng(7)
        C = rng.normal(size=(3, 3))
        prob = SdpProblem(dim=3, objective=0.5 * (C + C.T),
                          equalities=((LinearExpr(matrix=np.eye(3)), 1.0),))
        sol = solve_sdp(prob)
        assert np.linalg.eigvalsh(sol.S)[0] >= -1e-8

    def test_two_starts_agree(self):
        prob = SdpProblem(dim=2, objective=np.diag([1.0, 3.0]),
                          equalities=((LinearExpr(matrix=np.eye(2)), 1.0),))
        a = solve_sdp(prob, warm_start=0.5 * np.eye(2))
        b = solve_sdp(prob, warm_start=np.diag([0.9, 0.1]))
        assert a.objective_value == pytest.approx(b.objective_value, abs=1e-6)

    @settings(max_examples=6, deadline=None)
    @given(st.integers(min_value=0, max_value=10_000),
           st.integers(min_value=2, max_value=3))
    def test_matches_analytic_min_eigenvalue(self, seed, m):
        rng = np.random.default_rng(seed)
        C = rng.normal(size=(m, m))
        C = 0.5 * (C + C.T)
        prob = SdpProblem(dim=m, objective=C,
                          equalities=((LinearExpr(matrix=np.eye(m)), 1.0),))
        sol = solve_sdp(prob)
        assert sol.converged
        assert sol.objective_value == pytest.approx(
            np.linalg.eigvalsh(C)[0], abs=1e-5)

    def test_matches_random_search_with_inequality(self):
        rng = np.random.default_rng(11)
        m = 2
        C = rng.normal(size=(m, m)); C = 0.5 * (C + C.T)
        D = rng.normal(size=(m, m)); D = 0.5 * (D + D.T)
        e = float(np.trace(D) / m) + 0.2
        prob = SdpProblem(dim=m, objective=C,
                          equalities=((LinearExpr(matrix=np.eye(m)), 1.0),),
                          inequalities=((LinearExpr(matrix=D), e),))

        def project(M):
            vals, vecs = np.linalg.eigh(0.5 * (M + M.T))
            vals = np.maximum(vals, 0.0)
            if vals.sum() <= 0:
                return None
            S = (vecs * vals) @ vecs.T
            S = S / np.trace(S)
            return S if float(np.sum(D * S)) <= e else None

        oracle = refined_random_search(lambda S: float(np.sum(C * S)),
                                       project, rng, m)
        sol = solve_sdp(prob)
        assert sol.converged
        assert check_feasibility(prob, sol.S, tol=1e-6).feasible
        assert sol.objective_value == pytest.approx(oracle, abs=1e-3)


class TestCheckFeasibility:
    def unit_trace_problem(self):
        return SdpProblem(dim=2, objective=np.eye(2),
                          equalities=((LinearExpr(matrix=np.eye(2)), 1.0),))

    def test_feasible_point(self):
        rep = check_feasibility(self.unit_trace_problem(), 0.5 * np.eye(2))
        assert rep.feasible

    def test_cone_violation(self):
        rep = check_feasibility(
            SdpProblem(dim=2, objective=np.eye(2)), -np.eye(2))
        assert not rep.feasible
        assert rep.min_eigenvalue == pytest.approx(-1.0)

    def test_equality_residual_reported(self):
        eps = 1e-3
        rep = check_feasibility(self.unit_trace_problem(),
                                (0.5 + eps / 2) * np.eye(2))
        assert rep.equality_residuals[0] == pytest.approx(eps)
        assert not rep.feasible


class TestSvec:
    @settings(max_examples=30, deadline=None)
    @given(st.integers(min_value=0, max_value=10_000),
           st.integers(min_value=1, max_value=6))
    def test_roundtrip_and_inner_product(self, seed, m):
        rng = np.random.default_rng(seed)
        A = rng.normal(size=(m, m)); A = 0.5 * (A + A.T)
        B = rng.normal(size=(m, m)); B = 0.5 * (B + B.T)
        np.testing.assert_allclose(smat(svec(A), m), A, atol=1e-12)
        assert float(svec(A) @ svec(B)) == pytest.approx(
            float(np.sum(A * B)), rel=1e-10, abs=1e-12)
