"""Single-system test against the composite phase-flip null hypothesis.

For a real non-negative, non-increasing unit vector psi in R^d and
eps in [0, 1], X_eps(psi) is the squared maximum of <psi|phi> over vectors
phi with ||phi|| <= 1 whose overlap with every phase-flipped uniform vector
|phi_k> = d^{-1/2} sum_i (-1)^{k_i}|i> is at most eps.  The optimum is
attained by a non-negative non-increasing phi, reducing the constraints to
||phi|| <= 1 and <phi_d|phi> <= eps.

The closed form works with truncations: psi_l (first l entries of psi,
renormalized), the uniform vector phi_l on l entries, c_l = <psi_l|phi_l>
and eps_l = sqrt(d/l) eps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import TOL

# Vectors closer than this (in 2-norm) are treated as equal.
EQUAL_TOL = 1e-12
# Strict "< 0" on the last component of phi'_l.
SIGN_TOL = 1e-12


class CompositeError(ValueError):
    pass


@dataclass(frozen=True)
class CompositeInstance:
    psi: np.ndarray
    epsilon: float

    def __post_init__(self):
        psi = np.asarray(self.psi)
        if np.iscomplexobj(psi):
            if np.any(np.abs(psi.imag) > 0):
                raise CompositeError("psi must be real")
            psi = psi.real
        psi = psi.astype(float)
        if psi.ndim != 1 or psi.size == 0:
            raise CompositeError("psi must be a non-empty vector")
        if np.any(psi < 0):
            raise CompositeError("psi must have non-negative components")
        if np.any(np.diff(psi) > 0):
            raise CompositeError("psi components must be non-increasing")
        if abs(np.linalg.norm(psi) - 1.0) > TOL.structural:
            raise CompositeError(f"psi must have unit norm (got {np.linalg.norm(psi)!r})")
        eps = float(self.epsilon)
        if not (0.0 <= eps <= 1.0 + TOL.structural):
            raise CompositeError(f"epsilon={eps} outside [0, 1]")
        object.__setattr__(self, "psi", psi)
        object.__setattr__(self, "epsilon", min(eps, 1.0))

    @property
    def d(self) -> int:
        return self.psi.size


@dataclass(frozen=True)
class TruncationData:
    l: int
    epsilon_l: float
    psi_l: np.ndarray
    phi_l: np.ndarray
    c_l: float
    # ||psi_l - c_l phi_l||, i.e. sqrt(1 - c_l^2) evaluated without cancellation
    s_l: float
    phi_prime_l: Optional[np.ndarray]

    @property
    def psi_equals_phi(self) -> bool:
        return self.s_l <= EQUAL_TOL


def _as_instance(psi, epsilon) -> CompositeInstance:
    if isinstance(psi, CompositeInstance):
        return psi
    return CompositeInstance(np.asarray(psi), epsilon)


def truncation(psi, epsilon, l: int) -> TruncationData:
    inst = _as_instance(psi, epsilon)
    d = inst.d
    if not (1 <= l <= d):
        raise CompositeError(f"truncation level l={l} outside [1, {d}]")
    head = inst.psi[:l]
    norm = np.linalg.norm(head)
    if norm == 0:
        raise CompositeError(f"truncation level l={l} has zero weight")
    psi_l = head / norm
    phi_l = np.full(l, 1.0 / math.sqrt(l))
    c = float(psi_l @ phi_l)
    perp = psi_l - c * phi_l
    s = float(np.linalg.norm(perp))
    if s <= EQUAL_TOL:
        c, s = 1.0, 0.0
    c = min(c, 1.0)
    eps_l = math.sqrt(d / l) * inst.epsilon
    phi_prime = None
    if s > 0 and eps_l < c:
        # eps_l phi_l plus the component along psi_l orthogonal to phi_l
        phi_prime = eps_l * phi_l + math.sqrt(1.0 - eps_l**2) * (perp / s)
    return TruncationData(l, eps_l, psi_l, phi_l, c, s, phi_prime)


def _condition(t: TruncationData) -> bool:
    return (
        t.epsilon_l < t.c_l
        and not t.psi_equals_phi
        and t.phi_prime_l is not None
        and t.phi_prime_l[-1] < -SIGN_TOL
    )


def compute_eta(psi, epsilon) -> int:
    """Threshold index eta in [1, d].

    eta = d when eps_d >= c_d or psi = phi_d, or when no level satisfies the
    condition; otherwise one less than the smallest level l with
    eps_l < c_l, psi_l != phi_l and a negative last entry of phi'_l.
    """
    inst = _as_instance(psi, epsilon)
    d = inst.d
    top = truncation(inst, None, d)
    if top.epsilon_l >= top.c_l or top.psi_equals_phi:
        return d
    for l in range(1, d + 1):
        if _condition(truncation(inst, None, l)):
            return l - 1
    return d


@dataclass(frozen=True)
class CompositeSolution:
    value: float
    phi: np.ndarray  # length d, zero beyond eta
    eta: int
    branch: str  # "trivial", "uniform" or "nontrivial"


def solve_x_epsilon(psi, epsilon) -> CompositeSolution:
    inst = _as_instance(psi, epsilon)
    d = inst.d
    eta = compute_eta(inst, None)
    t = truncation(inst, None, eta)
    weight = math.fsum(inst.psi[:eta] ** 2)
    phi = np.zeros(d)
    if t.epsilon_l >= t.c_l:
        phi[:eta] = t.psi_l
        return CompositeSolution(min(1.0, weight), phi, eta, "trivial")
    overlap = math.sqrt(1.0 - t.epsilon_l**2) * t.s_l + t.epsilon_l * t.c_l
    value = min(1.0, weight * overlap**2)
    if t.psi_equals_phi:
        phi[:eta] = t.epsilon_l * t.phi_l
        return CompositeSolution(value, phi, eta, "uniform")
    phi[:eta] = t.phi_prime_l
    return CompositeSolution(value, phi, eta, "nontrivial")


def x_epsilon(psi, epsilon) -> tuple:
    """Return (X_eps(psi), optimal phi)."""
    sol = solve_x_epsilon(psi, epsilon)
    return sol.value, sol.phi


def phase_flip_overlaps(phi) -> np.ndarray:
    """|<phi_k|phi>|^2 for every sign vector k (2^d entries)."""
    phi = np.asarray(phi, dtype=float)
    d = phi.size
    signs = 1 - 2 * ((np.arange(2**d)[:, None] >> np.arange(d)[None, :]) & 1)
    return (signs @ phi) ** 2 / d
