import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from simule.errors import UsageError
from simule.lp import (LinearProgram, LPStatus, SolverOptions, brute_force_lp_oracle,
                       solve_lp)


def lp(c, g, h):
    return LinearProgram.from_dense(np.asarray(c, float), np.asarray(g, float),
                                    np.asarray(h, float))


def random_lp(rng):
    """Small LP with integer data; a box keeps most instances bounded."""
    n = int(rng.integers(1, 5))
    m = int(rng.integers(1, 12 - 2 * n + 1)) if 12 - 2 * n >= 1 else 0
    g = rng.integers(-5, 6, size=(m, n)).astype(float)
    h = rng.integers(-5, 10, size=m).astype(float)
    box = float(rng.integers(1, 20))
    g = np.vstack([g, np.eye(n), -np.eye(n)])
    h = np.concatenate([h, np.full(n, box), np.full(n, box)])
    c = rng.integers(-5, 6, size=n).astype(float)
    return lp(c, g, h)


def test_one_variable_box():
    sol = solve_lp(lp([1.0], [[-1.0], [1.0]], [-1.0, 2.0]))
    assert sol.status is LPStatus.OPTIMAL
    assert sol.x[0] == pytest.approx(1.0, abs=1e-6)
    assert sol.objective_value == pytest.approx(1.0, abs=1e-6)


def test_degenerate_face():
    prob = lp([1.0, 1.0], [[-1, 0], [0, -1], [-1, -1]], [0.0, 0.0, -1.0])
    sol = solve_lp(prob)
    assert sol.status is LPStatus.OPTIMAL
    assert sol.objective_value == pytest.approx(1.0, abs=1e-6)
    assert brute_force_lp_oracle(prob) == pytest.approx(1.0)


def test_infeasible_and_unbounded():
    infeasible = lp([0.0], [[1.0], [-1.0]], [0.0, -1.0])
    assert solve_lp(infeasible).status is LPStatus.INFEASIBLE
    assert brute_force_lp_oracle(infeasible) == np.inf
    unbounded = lp([-1.0], [[-1.0]], [0.0])
    assert solve_lp(unbounded).status is LPStatus.UNBOUNDED
    assert brute_force_lp_oracle(unbounded) == -np.inf


def test_oracle_size_cap():
    with pytest.raises(UsageError):
        brute_force_lp_oracle(lp(np.zeros(5), np.eye(5), np.ones(5)))


def test_options_validated():
    with pytest.raises(UsageError):
        SolverOptions(feasibility_tol=0)
    with pytest.raises(UsageError):
        SolverOptions(step_fraction=1.0)
    with pytest.raises(UsageError):
        lp([1.0, 2.0], [[1.0]], [1.0])


def test_random_lps_match_vertex_oracle():
    rng = np.random.default_rng(2024)
    failures = []
    for trial in range(500):
        prob = random_lp(rng)
        ref = brute_force_lp_oracle(prob)
        sol = solve_lp(prob)
        if np.isinf(ref):
            ok = sol.status is LPStatus.INFEASIBLE
        else:
            ok = (sol.status is LPStatus.OPTIMAL
                  and abs(sol.objective_value - ref) <= 1e-5 * max(1.0, abs(ref)))
        if not ok:
            failures.append((trial, ref, sol.status, sol.objective_value))
    assert not failures, failures[:5]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.01, 100.0))
def test_objective_scaling(seed, scale):
    prob = random_lp(np.random.default_rng(seed))
    base = solve_lp(prob)
    scaled = solve_lp(LinearProgram.from_dense(scale * prob.objective, prob.ineq_matrix,
                                               prob.ineq_rhs))
    assert base.status == scaled.status
    if base.status is LPStatus.OPTIMAL:
        assert scaled.objective_value == pytest.approx(scale * base.objective_value,
                                                       rel=1e-5, abs=1e-5 * scale)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_optimal_points_are_feasible(seed):
    prob = random_lp(np.random.default_rng(seed))
    sol = solve_lp(prob)
    if sol.status is LPStatus.OPTIMAL:
        viol = prob.ineq_matrix @ sol.x - prob.ineq_rhs
        assert viol.max() <= 1e-6
        assert sol.duality_gap <= 1e-7
