"""Optimal separable test and the operators behind it.

The separable success probability equals X_eps(psi) of the composite test
with eps = sqrt(alpha dB) (for dA <= dB).  The optimal POVM element is

    T(phi) = V|phi><phi|V^dag + sum_{j != k} |phi_j||phi_k| |jk><jk|,

with V = sum_i |ii><i|.  T(phi) is the phase twirl of the product operator
|a><a| (x) |a><a| with a_j = sqrt(phi_j), so it is separable, and its trace
is (sum_j phi_j)^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .composite import solve_x_epsilon
from .core import HermitianOperator, TestInstance, TOL, check_alpha, clamp01, schmidt_vector


@dataclass(frozen=True)
class SeparableSolution:
    beta: float
    eta: int
    optimal_phi: np.ndarray
    povm_T: HermitianOperator
    epsilon: float
    branch: str


@dataclass(frozen=True)
class MaxCorrelatedOperator:
    """Operator sum_ij beta_ij |ii><jj| on span{|ii>}."""

    beta_matrix: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.beta_matrix, dtype=complex)
        if b.ndim != 2 or b.shape[0] != b.shape[1]:
            raise ValueError("beta_matrix must be square")
        object.__setattr__(self, "beta_matrix", b)

    @property
    def d(self) -> int:
        return self.beta_matrix.shape[0]

    @classmethod
    def from_vector(cls, a) -> "MaxCorrelatedOperator":
        a = np.asarray(a, dtype=complex)
        return cls(np.outer(a, a.conj()))

    @classmethod
    def from_operator(cls, T: HermitianOperator) -> "MaxCorrelatedOperator":
        d_a, d_b = T.dims
        idx = [i * d_b + i for i in range(min(d_a, d_b))]
        return cls(T.matrix[np.ix_(idx, idx)])

    def to_operator(self, d_a: int, d_b: int) -> HermitianOperator:
        if self.d > min(d_a, d_b):
            raise ValueError("beta_matrix larger than min(dA, dB)")
        mat = np.zeros((d_a * d_b, d_a * d_b), dtype=complex)
        idx = [i * d_b + i for i in range(self.d)]
        mat[np.ix_(idx, idx)] = self.beta_matrix
        return HermitianOperator(mat, (d_a, d_b))

    def is_psd(self, tol: float = TOL.structural) -> bool:
        return bool(np.linalg.eigvalsh(self.beta_matrix).min() >= -tol)


def build_T_phi(phi, d_a: int, d_b: int, offdiag: str = "product", tol: float = TOL.structural) -> HermitianOperator:
    """Separable POVM element T(phi).

    ``offdiag`` selects the |jk><jk| weights: "product" uses
    |phi_j||phi_k| (trace equals (sum phi)^2); "sqrt" uses
    sqrt(phi_j phi_k) and is kept only for comparison.
    """
    phi = np.asarray(phi, dtype=float)
    if phi.ndim != 1 or phi.size > min(d_a, d_b):
        raise ValueError(f"phi must be a vector of length <= min(dA, dB) = {min(d_a, d_b)}")
    if np.any(phi < -tol):
        raise ValueError("phi has negative components")
    if np.linalg.norm(phi) > 1 + tol:
        raise ValueError(f"phi has norm {np.linalg.norm(phi)!r} > 1")
    phi = np.clip(phi, 0.0, None)
    n = d_a * d_b
    mat = np.zeros((n, n), dtype=complex)
    idx = np.array([i * d_b + i for i in range(phi.size)], dtype=int)
    mat[np.ix_(idx, idx)] = np.outer(phi, phi)
    if offdiag == "product":
        w = np.outer(phi, phi)
    elif offdiag == "sqrt":
        w = np.sqrt(np.outer(phi, phi))
    else:
        raise ValueError(f"unknown offdiag variant {offdiag!r}")
    for j in range(phi.size):
        for k in range(phi.size):
            if j != k:
                pos = j * d_b + k
                mat[pos, pos] = w[j, k]
    return HermitianOperator(mat, (d_a, d_b))


def beta_separable(instance: TestInstance, alpha) -> SeparableSolution:
    check_alpha(alpha)
    if instance.d_a > instance.d_b:
        sol = beta_separable(instance.swapped(), alpha)
        return SeparableSolution(
            sol.beta, sol.eta, sol.optimal_phi, sol.povm_T.swap_parties(), sol.epsilon, sol.branch
        )
    d_a, d_b = instance.d_a, instance.d_b
    psi = np.zeros(d_a)
    sv = schmidt_vector(instance.spectrum)
    psi[: sv.size] = sv
    eps = min(1.0, math.sqrt(float(alpha) * d_b))
    comp = solve_x_epsilon(psi, eps)
    T = build_T_phi(comp.phi, d_a, d_b)
    return SeparableSolution(clamp01(1.0 - comp.value), comp.eta, comp.phi, T, eps, comp.branch)


def _correlated_mask(d_a: int, d_b: int) -> np.ndarray:
    n = d_a * d_b
    in_q = np.zeros(n, dtype=bool)
    for i in range(min(d_a, d_b)):
        in_q[i * d_b + i] = True
    return np.outer(in_q, in_q) | np.eye(n, dtype=bool)


def twirl(T: HermitianOperator) -> HermitianOperator:
    """P_Q T P_Q + sum_{j != k} |jk><jk| T |jk><jk|.

    Keeps the block on span{|ii>} and the diagonal everywhere else.
    """
    d_a, d_b = T.dims
    return HermitianOperator(np.where(_correlated_mask(d_a, d_b), T.matrix, 0), T.dims)


def chi_pure(a) -> float:
    """chi of the (unnormalized) pure state sum_i a_i|ii>: (sum|a_i|)^2."""
    return float(np.sum(np.abs(np.asarray(a)))) ** 2


def chi_prime(rho) -> float:
    """Entrywise absolute sum of the coefficient matrix on span{|ii>}."""
    if isinstance(rho, HermitianOperator):
        rho = MaxCorrelatedOperator.from_operator(rho)
    b = rho.beta_matrix if isinstance(rho, MaxCorrelatedOperator) else np.asarray(rho)
    return float(np.abs(b).sum())


def robustness_pure(spectrum) -> float:
    """sum_{j != k} sqrt(lambda_j lambda_k)."""
    lam = spectrum.as_array() if hasattr(spectrum, "as_array") else np.asarray(spectrum, dtype=float)
    r = np.sqrt(lam)
    return float(r.sum() ** 2 - np.sum(r * r)) if r.size > 1 else 0.0


def _random_isometry(rng, rows: int, cols: int) -> np.ndarray:
    z = rng.normal(size=(cols, cols)) + 1j * rng.normal(size=(cols, cols))
    q, r = np.linalg.qr(z)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    return q[:rows]


def chi_upper_bound(rho: MaxCorrelatedOperator, samples: int = 2000, seed: int = 0, extra: int = 2) -> float:
    """Upper bound on the convex roof chi(rho) from sampled decompositions.

    Every decomposition rho = sum_i w_i w_i^dag comes from W = B^{1/2} U with
    U an isometry; its cost is sum_i (sum_j |W_ji|)^2.
    """
    evals, evecs = np.linalg.eigh(rho.beta_matrix)
    keep = evals > TOL.structural
    root = evecs[:, keep] * np.sqrt(evals[keep])
    r = root.shape[1]
    if r == 0:
        return 0.0
    rng = np.random.default_rng(seed)
    best = float(np.sum(np.abs(root).sum(axis=0) ** 2))
    for _ in range(samples):
        k = r + int(rng.integers(0, extra + 1))
        W = root @ _random_isometry(rng, r, k)
        best = min(best, float(np.sum(np.abs(W).sum(axis=0) ** 2)))
    return best
