import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from locc_hyptest.composite import (
    CompositeError,
    compute_eta,
    phase_flip_overlaps,
    solve_x_epsilon,
    truncation,
    x_epsilon,
)
from locc_hyptest.oracles import oracle_x_epsilon

PSI = np.sqrt([0.75, 0.25])


def test_truncation_example():
    t = truncation(PSI, 0.5, 2)
    assert t.c_l == pytest.approx(0.9659258, abs=1e-6)
    assert t.s_l == pytest.approx(0.2588190, abs=1e-6)
    assert np.allclose(t.phi_prime_l, [0.9659258, -0.2588190], atol=1e-6)
    t2 = truncation(PSI, np.sqrt(0.7), 2)
    assert np.allclose(t2.phi_prime_l, [0.9789, 0.2043], atol=1e-4)


def test_eta_examples():
    assert compute_eta(PSI, 0.5) == 1
    assert compute_eta(PSI, 1.0) == 2
    assert compute_eta(np.sqrt([0.5, 0.5]), 0.5) == 2


@pytest.mark.parametrize("psi, eps, want", [
    (PSI, 0.5, 0.375),
    (PSI, 1.0, 1.0),
    (PSI, 0.0, 0.0),
    (np.array([1.0, 0.0, 0.0]), 0.5, 0.75),
])
def test_values(psi, eps, want):
    value, phi = x_epsilon(psi, eps)
    assert value == pytest.approx(want, abs=1e-12)
    assert np.dot(psi, phi) ** 2 == pytest.approx(value, abs=1e-12)


def test_branches():
    assert solve_x_epsilon(PSI, 1.0).branch == "trivial"
    assert solve_x_epsilon(PSI, 0.5).branch == "uniform"
    assert solve_x_epsilon(PSI, np.sqrt(0.7)).branch == "nontrivial"


def test_rejects_bad_input():
    with pytest.raises(CompositeError):
        x_epsilon(np.array([0.5, np.sqrt(0.75)]), 0.5)
    with pytest.raises(CompositeError):
        x_epsilon(PSI, 1.5)
    with pytest.raises(CompositeError):
        x_epsilon(np.array([1.0, 1.0]), 0.5)


unit_vectors = st.lists(st.floats(0.01, 1.0), min_size=2, max_size=5).map(
    lambda xs: np.sort(np.array(xs))[::-1] / np.linalg.norm(xs)
)


@settings(max_examples=60, deadline=None)
@given(unit_vectors, st.floats(0.0, 1.0))
def test_optimizer_is_feasible(psi, eps):
    value, phi = x_epsilon(psi, eps)
    assert np.linalg.norm(phi) <= 1 + 1e-9
    assert np.all(phase_flip_overlaps(phi) <= eps + 1e-9)
    assert 0 <= value <= 1 + 1e-12


@settings(max_examples=40, deadline=None)
@given(unit_vectors, st.floats(0.0, 0.99))
def test_monotone_in_epsilon(psi, eps):
    assert x_epsilon(psi, eps)[0] <= x_epsilon(psi, min(1.0, eps + 0.01))[0] + 1e-12


@settings(max_examples=40, deadline=None)
@given(unit_vectors, st.floats(0.0, 1.0))
def test_recursion_through_eta(psi, eps):
    # X_eps(psi) equals the truncated problem at eta, weighted by the kept mass
    sol = solve_x_epsilon(psi, eps)
    t = truncation(psi, eps, sol.eta)
    mass = float(np.sum(psi[: sol.eta] ** 2))
    sub = x_epsilon(t.psi_l, min(1.0, t.epsilon_l))[0]
    assert sol.value == pytest.approx(mass * sub, abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(unit_vectors, st.floats(0.0, 1.0))
def test_against_enumeration(psi, eps):
    assert oracle_x_epsilon(psi, eps, restarts=50).status.value == "agree"
