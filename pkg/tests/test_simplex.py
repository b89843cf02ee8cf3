import numpy as np
import pytest
from scipy.optimize import linprog

from aemod.errors import SolverError
from aemod.lp import simplex


def test_textbook_max():
    # max 3x + 5y  s.t. x <= 4, 2y <= 12, 3x + 2y <= 18  ->  (2, 6), 36
    res = simplex([-3, -5], [[1, 0], [0, 2], [3, 2]], [4, 12, 18])
    assert res.status == "optimal"
    assert res.x == pytest.approx([2, 6])
    assert res.fun == pytest.approx(-36)
    assert res.ineq_duals == pytest.approx([0, 1.5, 1])


def test_equalities_and_negative_rhs():
    # min x + y  s.t. x + y == 2, -x <= -0.5
    res = simplex([1, 1], [[-1, 0]], [-0.5], [[1, 1]], [2])
    assert res.status == "optimal"
    assert res.fun == pytest.approx(2)
    assert res.x[0] >= 0.5 - 1e-12


def test_infeasible_and_unbounded():
    assert simplex([1], [[1], [-1]], [1, -2]).status == "infeasible"
    assert simplex([-1, 0], [[0, 1]], [1]).status == "unbounded"


def test_redundant_equalities_dropped():
    res = simplex([1, 2], A_eq=[[1, 1], [2, 2]], b_eq=[1, 2])
    assert res.status == "optimal"
    assert res.x == pytest.approx([1, 0])


def test_iteration_cap_raises():
    with pytest.raises(SolverError):
        simplex([-3, -5], [[1, 0], [0, 2], [3, 2]], [4, 12, 18], max_iter=1)


def test_secondary_objective_picks_within_optimal_face():
    # every point on x + y = 1 is optimal for max x + y; secondary pushes toward large y
    res = simplex([-1, -1], [[1, 1]], [1], secondary=[1, -1])
    assert res.fun == pytest.approx(-1)
    assert res.x == pytest.approx([0, 1])
    res = simplex([-1, -1], [[1, 1]], [1], secondary=[-1, 1])
    assert res.x == pytest.approx([1, 0])


def test_degenerate_cycling_example_terminates():
    # Beale's example cycles under the largest-coefficient rule
    c = [-0.75, 150, -0.02, 6]
    A = [[0.25, -60, -0.04, 9], [0.5, -90, -0.02, 3], [0, 0, 1, 0]]
    res = simplex(c, A, [0, 0, 1])
    assert res.status == "optimal"
    assert res.fun == pytest.approx(-0.05)


@pytest.mark.parametrize("seed", range(60))
def test_matches_reference_solver(seed):
    rng = np.random.default_rng(seed)
    m, n = rng.integers(2, 9), rng.integers(2, 9)
    A = rng.normal(size=(m, n))
    b = rng.uniform(-1, 3, size=m)
    c = rng.normal(size=n)
    A_eq = b_eq = None
    if seed % 3 == 0:
        A_eq = rng.normal(size=(1, n))
        b_eq = rng.uniform(0, 1, size=1)
    ref = linprog(c, A, b, A_eq, b_eq, bounds=[(0, 10)] * n, method="highs")
    A_full = np.vstack([A, np.eye(n)])
    b_full = np.concatenate([b, np.full(n, 10.0)])
    res = simplex(c, A_full, b_full, A_eq, b_eq)
    if ref.status == 2:
        assert res.status == "infeasible"
        return
    assert res.status == "optimal"
    assert res.fun == pytest.approx(ref.fun, abs=1e-7)
    # strong duality and dual feasibility in the Lagrangian convention
    nu = res.ineq_duals
    eta = res.eq_duals if A_eq is not None else np.zeros(0)
    dual_obj = -(b_full @ nu) - (b_eq @ eta if A_eq is not None else 0.0)
    assert dual_obj == pytest.approx(res.fun, abs=1e-7)
    assert np.all(nu >= -1e-9)
    grad = c + A_full.T @ nu + (A_eq.T @ eta if A_eq is not None else 0.0)
    assert np.all(grad >= -1e-7)
    assert abs(grad @ res.x) < 1e-6
