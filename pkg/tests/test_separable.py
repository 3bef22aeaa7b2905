import itertools

import numpy as np
import pytest

from locc_hyptest.core import HermitianOperator, TestInstance
from locc_hyptest.oracles import povm_validity, ppt_check
from locc_hyptest.separable import (
    MaxCorrelatedOperator,
    beta_separable,
    build_T_phi,
    chi_prime,
    chi_pure,
    chi_upper_bound,
    robustness_pure,
    twirl,
)


def test_build_T_phi_example():
    T = build_T_phi(np.array([0.9, 0.3]), 2, 2)
    want = np.array([
        [0.81, 0, 0, 0.27],
        [0, 0.27, 0, 0],
        [0, 0, 0.27, 0],
        [0.27, 0, 0, 0.09],
    ])
    assert np.allclose(T.matrix, want)
    assert T.trace() == pytest.approx(1.2 ** 2)
    assert ppt_check(T)


def test_sqrt_variant_breaks_trace():
    phi = np.array([0.9, 0.3])
    assert build_T_phi(phi, 2, 2, offdiag="sqrt").trace() > build_T_phi(phi, 2, 2).trace() + 0.4


@pytest.mark.parametrize("bad", [np.array([1.0, 1.0]), np.array([0.5, -0.2]), np.array([0.5, 0.3, 0.1])])
def test_build_T_phi_rejects(bad):
    with pytest.raises(ValueError):
        build_T_phi(bad, 2, 2)


@pytest.mark.parametrize("alpha", [0.1, 0.3, 0.4, 0.46, 0.6])
def test_certificate_valid(fig1, alpha):
    sol = beta_separable(fig1, alpha)
    v = povm_validity(sol.povm_T, fig1, alpha)
    assert v.ok
    assert v.beta_T == pytest.approx(sol.beta, abs=1e-9)
    assert ppt_check(sol.povm_T)


def test_swap_dims_agree():
    a = beta_separable(TestInstance.from_lambdas([0.75, 0.25], 3, 2), 0.3)
    b = beta_separable(TestInstance.from_lambdas([0.75, 0.25], 2, 3), 0.3)
    assert a.beta == pytest.approx(b.beta, abs=1e-14)
    assert a.povm_T.dims == (3, 2)


def _phase_average(T: HermitianOperator) -> np.ndarray:
    d_a, d_b = T.dims
    w = np.exp(2j * np.pi / 3)
    out = np.zeros_like(T.matrix)
    # phases on A act on both parties' matched index, extra B levels get their own
    charges = list(itertools.product(range(3), repeat=d_b))
    for ch in charges:
        ua = np.diag([w ** ch[i] for i in range(d_a)])
        ub = np.diag([w ** (-ch[i]) if i < d_a else w ** ch[i] for i in range(d_b)])
        U = np.kron(ua, ub)
        out += U @ T.matrix @ U.conj().T
    return out / len(charges)


def test_twirl_matches_phase_average():
    rng = np.random.default_rng(5)
    for dims in ((2, 2), (2, 3)):
        n = dims[0] * dims[1]
        g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        T = HermitianOperator(g + g.conj().T, dims)
        assert np.allclose(twirl(T).matrix, _phase_average(T), atol=1e-12)
        assert np.allclose(twirl(twirl(T)).matrix, twirl(T).matrix)


def test_twirl_example():
    T = twirl(HermitianOperator(np.ones((4, 4)), (2, 2)))
    want = np.eye(4)
    want[0, 3] = want[3, 0] = 1
    assert np.allclose(T.matrix, want)


def test_chi_examples():
    psi = np.sqrt([0.75, 0.25])
    assert chi_pure(psi) == pytest.approx((np.sqrt(0.75) + 0.5) ** 2)
    assert chi_prime(MaxCorrelatedOperator.from_vector(psi)) == pytest.approx(chi_pure(psi))
    assert chi_prime(MaxCorrelatedOperator.from_vector(np.array([1.0, 0.0]))) == pytest.approx(1.0)
    assert chi_prime(np.eye(3) / 3) == pytest.approx(1.0)


def test_chi_upper_bound_dominates():
    rng = np.random.default_rng(9)
    for _ in range(5):
        g = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        b = g @ g.conj().T
        rho = MaxCorrelatedOperator(b / np.trace(b).real)
        assert chi_upper_bound(rho, samples=200, seed=1) >= chi_prime(rho) - 1e-9


@pytest.mark.parametrize("lam, want", [
    ([1.0], 0.0),
    ([0.5, 0.5], 1.0),
    ([0.75, 0.25], 2 * np.sqrt(0.75 * 0.25)),
    ([1 / 3] * 3, 2.0),
])
def test_robustness(lam, want):
    assert robustness_pure(np.array(lam)) == pytest.approx(want)
    assert robustness_pure(np.array(lam)) == pytest.approx(chi_pure(np.sqrt(lam)) - 1)
