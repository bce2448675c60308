import json

import numpy as np
import pytest

from oracles import soft_threshold_scalar
from smoothdiv.errors import DomainError
from smoothdiv.lasso import (
    LassoProblem,
    dumps_solution,
    kkt_residual,
    make_problem,
    objective,
    solve_lasso,
    surrogate_report,
)


class TestMakeProblem:
    def test_zero_signal(self):
        problem, q_true = make_problem(100, 20, 0, 0.0, 1, lam=1.0)
        assert np.all(problem.y == 0.0)
        assert np.all(q_true == 0.0)
        sol = solve_lasso(problem)
        assert np.all(sol.q_hat == 0.0)
        assert sol.l1 == 0.0

    def test_reproducible(self):
        a, qa = make_problem(200, 50, 5, 0.1, 7)
        b, qb = make_problem(200, 50, 5, 0.1, 7)
        assert a.x.tobytes() == b.x.tobytes()
        assert a.y.tobytes() == b.y.tobytes()
        assert qa.tobytes() == qb.tobytes()
        assert np.count_nonzero(qa) == 5

    def test_underdetermined(self):
        problem, _ = make_problem(50, 100, 3, 0.0, 3)
        assert (problem.n, problem.k) == (50, 100)

    @pytest.mark.parametrize(
        "args", [(0, 5, 1, 0.0, 1), (10, 0, 0, 0.0, 1), (10, 5, 6, 0.0, 1), (10, 5, 1, -1.0, 1)]
    )
    def test_invalid(self, args):
        with pytest.raises(DomainError):
            make_problem(*args)

    def test_problem_validation(self):
        with pytest.raises(DomainError):
            LassoProblem(np.ones((3, 2)), np.ones(4))
        with pytest.raises(DomainError):
            LassoProblem(np.ones((3, 2)), np.ones(3), lam=-1.0)


class TestSolver:
    def test_least_squares(self):
        problem, _ = make_problem(120, 15, 15, 0.5, 11, lam=0.0)
        sol = solve_lasso(problem, tol=1e-13)
        ls = np.linalg.lstsq(problem.x, problem.y, rcond=None)[0]
        np.testing.assert_allclose(sol.q_hat, ls, rtol=1e-8, atol=1e-10)
        assert sol.accepted

    def test_deactivation_bound(self):
        problem, _ = make_problem(80, 10, 3, 0.1, 2)
        lam = 2.0 * np.max(np.abs(problem.x.T @ problem.y))
        sol = solve_lasso(problem.with_lambda(lam))
        assert np.all(sol.q_hat == 0.0)
        # KKT at zero holds directly
        assert kkt_residual(problem.with_lambda(lam), np.zeros(10)) == 0.0
        sol = solve_lasso(problem.with_lambda(0.999 * lam))
        assert np.count_nonzero(sol.q_hat) >= 1

    @pytest.mark.parametrize("lam", [0.0, 0.5, 3.0, 40.0, 1e4])
    def test_one_dimensional(self, lam):
        rng = np.random.default_rng(4)
        x = rng.normal(size=(30, 1))
        y = 1.7 * x[:, 0] + rng.normal(size=30)
        sol = solve_lasso(LassoProblem(x, y, lam))
        col = x[:, 0]
        expected = soft_threshold_scalar(float(col @ y), lam / 2) / float(col @ col)
        assert sol.q_hat[0] == pytest.approx(expected, rel=1e-12, abs=1e-300)

    def test_objective_monotone(self):
        problem, _ = make_problem(60, 120, 6, 0.2, 5, lam=2.0)
        sol = solve_lasso(problem)
        h = np.array(sol.history)
        assert np.all(np.diff(h) <= 1e-12)
        assert sol.objective == pytest.approx(objective(problem, sol.q_hat))

    def test_kkt_certificate(self):
        problem, _ = make_problem(200, 50, 5, 0.1, 7, lam=5.0)
        sol = solve_lasso(problem)
        assert sol.converged and sol.accepted
        assert sol.kkt_residual <= 1e-6 * (1 + 5.0)
        assert sol.l1 == pytest.approx(np.sum(np.abs(sol.q_hat)))
        assert sol.rss == pytest.approx(np.sum((problem.y - problem.x @ sol.q_hat) ** 2))

    def test_non_convergence_flagged(self):
        problem, _ = make_problem(50, 40, 5, 0.1, 1, lam=0.1)
        sol = solve_lasso(problem, tol=1e-14, max_iter=2)
        assert sol.iterations == 2
        assert not sol.converged

    def test_scale_coherence(self):
        problem, _ = make_problem(100, 30, 4, 0.2, 8, lam=4.0)
        base = solve_lasso(problem, tol=1e-13)
        c = 3.5
        scaled = solve_lasso(LassoProblem(problem.x, c * problem.y, c * problem.lam), tol=1e-13)
        np.testing.assert_array_equal(np.sign(scaled.q_hat), np.sign(base.q_hat))
        nz = base.q_hat != 0
        np.testing.assert_allclose(scaled.q_hat[nz], c * base.q_hat[nz], rtol=1e-8)

    def test_standardize(self):
        problem, _ = make_problem(100, 10, 3, 0.1, 2, lam=0.0)
        sol = solve_lasso(problem, tol=1e-13, standardize=True)
        ls = np.linalg.lstsq(problem.x, problem.y, rcond=None)[0]
        np.testing.assert_allclose(sol.q_hat, ls, rtol=1e-8, atol=1e-10)

    def test_invalid_args(self):
        problem, _ = make_problem(10, 3, 1, 0.0, 1)
        with pytest.raises(DomainError):
            solve_lasso(problem, tol=0.0)
        with pytest.raises(DomainError):
            solve_lasso(problem, max_iter=0)


class TestSurrogates:
    def test_zero_solution(self):
        problem, _ = make_problem(40, 8, 0, 0.0, 1, lam=1.0)
        sol = solve_lasso(problem)
        rows = surrogate_report(sol, 1.0, [1e1, 1e3], [1e1, 1e3])
        assert len(rows) == 8
        for r in rows:
            assert r.limit_target == 0.0
            if r.mode.startswith("new/"):
                assert r.divergence_value == 0.0
            else:
                assert 0.0 < r.divergence_value <= 8 / r.family

    def test_fig1_analogue(self):
        problem, _ = make_problem(200, 50, 5, 0.1, 7, lam=1.0)
        sol = solve_lasso(problem)
        rows = surrogate_report(sol, 1.0, [1e4], [1e4])
        for r in rows:
            assert abs(r.gap) / sol.l1 <= 1e-2

    def test_sandwich(self):
        problem, _ = make_problem(200, 50, 5, 0.1, 7, lam=1.0)
        sol = solve_lasso(problem)
        k = sol.q_hat.size
        for r in surrogate_report(sol, 1.0, [1e1, 1e2, 1e3], [1e2, 1e3]):
            if r.mode.startswith("new/"):
                assert r.gap >= 0.0
            else:
                # c*b = 1; the phi surrogate is bounded by ||q - (1/m) 1||_1
                bound = np.sum(np.abs(sol.q_hat - 1.0 / r.family))
                assert r.divergence_value <= bound
                assert bound <= sol.l1 + k / r.family

    def test_shift_gap_m_independent(self):
        problem, _ = make_problem(200, 50, 5, 0.1, 7, lam=1.0)
        sol = solve_lasso(problem)
        rows = [r for r in surrogate_report(sol, 1.0, [1e4], [1e2, 1e3, 1e4]) if r.mode.startswith("new/")]
        vals = [r.divergence_value for r in rows]
        assert (max(vals) - min(vals)) / sol.l1 < 1e-3

    def test_json(self):
        problem, _ = make_problem(5, 3, 1, 0.0, 1, lam=0.5)
        sol = solve_lasso(problem)
        payload = json.loads(dumps_solution(problem, sol))
        for key in ("n", "k", "lambda", "x", "y", "q_hat", "l1", "kkt_residual", "iterations"):
            assert key in payload
        assert len(payload["x"]) == 15
        np.testing.assert_array_equal(np.reshape(payload["x"], (5, 3)), problem.x)
