import numpy as np
import pytest

from locc_hyptest.core import TestInstance
from locc_hyptest.one_way import beta_one_way
from locc_hyptest.oracles import oracle_two_way_sampling
from locc_hyptest.two_way import (
    PowersetAllocation,
    TriangularAllocation,
    constraint_value,
    objective_value,
    solve_two_way,
    solve_two_way_powerset,
)

FULL = TriangularAllocation(np.array([[1.0, 0.0], [1.0, 1.0]]))


def test_constraint_and_objective(fig1):
    # row {1}: 1 * 1; row {1,2}: 2 * (3/4 + 1/4) / (3/4 + 1/4)
    assert constraint_value(FULL, fig1.spectrum) == pytest.approx(3.0)
    assert objective_value(FULL, fig1.spectrum) == pytest.approx(1.75)
    ps = PowersetAllocation(2, {(0, 1): np.array([1.0, 0.5])})
    want = 2 * (0.75 + 0.25 * 0.25) / (0.75 + 0.25 * 0.5)
    assert constraint_value(ps, fig1.spectrum) == pytest.approx(want)


def test_constraint_convex(fig1):
    rng = np.random.default_rng(0)
    for _ in range(200):
        a = TriangularAllocation(np.tril(rng.random((2, 2))))
        b = TriangularAllocation(np.tril(rng.random((2, 2))))
        t = rng.random()
        mid = TriangularAllocation(t * a.m + (1 - t) * b.m)
        lhs = constraint_value(mid, fig1.spectrum)
        rhs = t * constraint_value(a, fig1.spectrum) + (1 - t) * constraint_value(b, fig1.spectrum)
        assert lhs <= rhs + 1e-12


@pytest.mark.parametrize("alpha, want", [(0.0, 1.0), (0.25, 0.25), (0.5, 0.0), (0.9, 0.0)])
def test_endpoints(fig1, alpha, want):
    assert solve_two_way(fig1, alpha).beta == pytest.approx(want, abs=1e-9)


def test_strict_improvement(fig1):
    tilde = solve_two_way(fig1, 0.35)
    assert tilde.beta < beta_one_way(fig1, 0.35).beta - 1e-3
    assert tilde.gap_bound <= 1e-9
    rep = oracle_two_way_sampling(fig1, 0.35, samples=5000, seed=2)
    assert rep.status.value == "agree"


def test_never_above_one_way():
    rng = np.random.default_rng(11)
    for _ in range(10):
        d = int(rng.integers(2, 5))
        lam = np.sort(rng.dirichlet(np.ones(d)))[::-1]
        inst = TestInstance.from_lambdas(lam / lam.sum())
        for alpha in np.linspace(0, 1, 7):
            assert solve_two_way(inst, alpha).beta <= beta_one_way(inst, alpha).beta + 1e-12


def test_powerset_single_row():
    sol = solve_two_way_powerset(TestInstance.from_lambdas([1.0], 1, 3), 0.5)
    assert sol.beta == pytest.approx(0.0, abs=1e-12)


def test_powerset_guard():
    with pytest.raises(ValueError, match="dA <= 4"):
        solve_two_way_powerset(TestInstance.from_lambdas([0.2] * 5), 0.5)


def test_powerset_at_least_triangular(fig1):
    for alpha in np.linspace(0, 0.5, 6):
        assert solve_two_way_powerset(fig1, alpha).beta <= solve_two_way(fig1, alpha).beta + 1e-9


def test_cross_check_with_cvxpy(fig1):
    cp = pytest.importorskip("cvxpy")
    lam = fig1.lambdas
    r = np.sqrt(lam)
    for alpha in (0.3, 0.35, 0.4, 0.45):
        a = cp.Variable(nonneg=True)
        b = cp.Variable(2, nonneg=True)
        s = cp.Variable(2)
        den = lam[0] * b[0] + lam[1] * b[1]
        cons = [
            a + b[0] <= 1, b[1] <= 1,
            a <= s[0],
            cp.quad_over_lin(cp.multiply(r, b), den) <= s[1],
            s[0] + 2 * s[1] <= fig1.budget(alpha),
        ]
        prob = cp.Problem(cp.Maximize(lam[0] * a + den), cons)
        prob.solve()
        assert 1 - prob.value == pytest.approx(solve_two_way(fig1, alpha).beta, abs=1e-6)
