import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vertex_oracle import random_bounded_lp, vertex_optimum
from coedge.errors import InvariantViolation
from coedge.lp import TOL, LPProblem, Status, solve


def test_single_lower_bound():
    sol = solve(LPProblem([1.0], [[-1.0]], [-3.0]))
    assert sol.ok
    assert sol.x[0] == pytest.approx(3.0)
    assert sol.objective == pytest.approx(3.0)


def test_simplex_edge():
    sol = solve(LPProblem([-1.0, -1.0], [[1.0, 1.0]], [1.0]))
    assert sol.objective == pytest.approx(-1.0)
    assert sol.x.sum() == pytest.approx(1.0)


def test_equality_and_constant():
    sol = solve(LPProblem([1.0, 2.0], A_eq=[[1.0, 1.0]], b_eq=[1.0], constant=5.0))
    assert sol.x.tolist() == pytest.approx([1.0, 0.0])
    assert sol.objective == pytest.approx(6.0)


def test_infeasible():
    # x <= 1 and x >= 2
    sol = solve(LPProblem([1.0], [[1.0], [-1.0]], [1.0, -2.0]))
    assert sol.status is Status.INFEASIBLE


def test_infeasible_equality():
    sol = solve(LPProblem([0.0, 0.0], A_eq=[[1.0, 1.0]], b_eq=[-1.0]))
    assert sol.status is Status.INFEASIBLE


def test_unbounded_with_ray():
    prob = LPProblem([-1.0, 0.0], [[-1.0, 1.0]], [1.0])
    sol = solve(prob)
    assert sol.status is Status.UNBOUNDED
    d = sol.ray
    # the ray keeps feasibility and improves the objective
    assert np.all(d >= -1e-12)
    assert np.all(prob.A_ub @ d <= 1e-12)
    assert prob.c @ d < 0


def test_no_constraints():
    assert solve(LPProblem([1.0, 0.0])).objective == 0.0
    assert solve(LPProblem([-1.0, 0.0])).status is Status.UNBOUNDED


def test_beale_cycling_example_terminates():
    # classic instance on which textbook Dantzig pricing cycles
    c = [-0.75, 20, -0.5, 6]
    A = [[0.25, -8, -1, 9], [0.5, -12, -0.5, 3], [0, 0, 1, 0]]
    sol = solve(LPProblem(c, A, [0, 0, 1]))
    assert sol.objective == pytest.approx(-1.25)


def test_degenerate_vertex():
    # many constraints meet at the optimum
    A = [[1, 1], [1, 2], [2, 1], [1, 0], [0, 1]]
    sol = solve(LPProblem([-1, -1], A, [2, 3, 3, 1, 1]))
    assert sol.objective == pytest.approx(-2.0)


def test_redundant_equalities():
    sol = solve(LPProblem([1, 1, 1], A_eq=[[1, 1, 1], [2, 2, 2]], b_eq=[1, 2]))
    assert sol.objective == pytest.approx(1.0)


def test_non_finite_rejected():
    with pytest.raises(InvariantViolation):
        LPProblem([np.nan])
    with pytest.raises(InvariantViolation):
        LPProblem([1.0, 1.0], [[1.0]], [1.0])


def test_tolerances_centralised():
    assert (TOL.feasibility, TOL.pivot, TOL.objective_rel) == (1e-7, 1e-11, 1e-6)


def test_matches_vertex_enumeration():
    rng = np.random.default_rng(2024)
    for _ in range(40):
        c, A, b, A_eq, b_eq = random_bounded_lp(rng)
        ref = vertex_optimum(c, A, b, A_eq, b_eq)
        sol = solve(LPProblem(c, A, b, A_eq, b_eq))
        assert sol.ok
        assert sol.objective == pytest.approx(ref, rel=1e-6, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.01, 100))
def test_objective_scaling_keeps_solution(seed, alpha):
    c, A, b, A_eq, b_eq = random_bounded_lp(np.random.default_rng(seed))
    x1 = solve(LPProblem(c, A, b, A_eq, b_eq)).x
    x2 = solve(LPProblem(alpha * c, A, b, A_eq, b_eq)).x
    assert np.allclose(x1, x2, atol=1e-7)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_optimal_points_are_certified(seed):
    c, A, b, A_eq, b_eq = random_bounded_lp(np.random.default_rng(seed))
    sol = solve(LPProblem(c, A, b, A_eq, b_eq))
    assert np.all(sol.x >= -1e-9)
    s = np.max(np.abs(A), axis=1)
    assert np.all((A @ sol.x - b) / s <= 1e-7)
    if A_eq is not None:
        assert np.all(np.abs(A_eq @ sol.x - b_eq) <= 1e-7 * np.max(np.abs(A_eq)))


def test_large_rhs_does_not_mask_infeasibility():
    # t >= 1.61e-3 from the first row but t <= 4.15e-4; the memory-style
    # second row has a huge right-hand side
    A = [[8.075678597742996e-05, -1.0], [8.984375e-02, 0.0], [0.0, 1.0]]
    b = [-1.5308085713766281e-03, 2.0876320737091435e04, 4.1521376612142845e-04]
    sol = solve(LPProblem([3.4e-4, 0.0], A, b, [[1.0, 0.0]], [1.0]))
    assert sol.status is Status.INFEASIBLE
