from fractions import Fraction

import numpy as np
import pytest

from locc_hyptest.core import TestInstance
from locc_hyptest.one_way import beta_one_way, optimal_one_way_povm
from locc_hyptest.oracles import oracle_one_way, povm_validity


@pytest.mark.parametrize("alpha, beta, c", [
    (Fraction(0), Fraction(1), 1),
    (Fraction(1, 8), Fraction(5, 8), 1),
    (Fraction(1, 4), Fraction(1, 4), 2),
    (Fraction(3, 8), Fraction(1, 8), 2),
    (Fraction(1, 2), Fraction(0), 2),
    (Fraction(3, 4), Fraction(0), 2),
])
def test_exact_values(fig1_exact, alpha, beta, c):
    sol = beta_one_way(fig1_exact, alpha)
    assert sol.beta == beta
    assert sol.c == c


def test_float_snaps_integer_budget(fig1):
    # 0.1 + 0.15 is not exactly 0.25 in floating point
    sol = beta_one_way(fig1, 0.1 + 0.15)
    assert sol.c == 2
    assert sol.beta == pytest.approx(0.25, abs=1e-12)


@pytest.mark.parametrize("alpha", [0.0, 0.1, 0.25, 0.35, 0.5, 0.8])
def test_povm_attains_beta(fig1, alpha):
    T = optimal_one_way_povm(fig1, alpha)
    v = povm_validity(T, fig1, alpha)
    assert v.ok
    assert v.beta_T == pytest.approx(beta_one_way(fig1, alpha).beta, abs=1e-12)
    assert v.alpha_T <= alpha + 1e-12


def test_matches_vertex_oracle():
    rng = np.random.default_rng(3)
    for _ in range(20):
        d = int(rng.integers(2, 6))
        lam = np.sort(rng.dirichlet(np.ones(d)))[::-1]
        inst = TestInstance.from_lambdas(lam / lam.sum())
        for alpha in np.linspace(0, 1, 6):
            rep = oracle_one_way(inst, alpha, samples=200, seed=1)
            assert rep.status.value == "agree", rep


def test_monotone(fig1):
    betas = [beta_one_way(fig1, a).beta for a in np.linspace(0, 1, 41)]
    assert all(b2 <= b1 + 1e-12 for b1, b2 in zip(betas, betas[1:]))
