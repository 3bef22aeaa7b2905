"""Problem statement types and class-agnostic trade-off utilities.

A test instance is the pure bipartite state |Psi> = sum_i sqrt(lambda_i)|ii>
on C^dA (x) C^dB, tested against white noise I/(dA dB).  A two-outcome POVM
{T, I - T} has type-1 error alpha = Tr(T)/(dA dB) and type-2 error
beta = 1 - <Psi|T|Psi>.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Optional, Sequence

import numpy as np


class InstanceError(ValueError):
    """Raised when a spectrum or instance violates its invariants."""


@dataclass(frozen=True)
class Tolerances:
    structural: float = 1e-12
    optimization: float = 1e-9
    oracle: float = 1e-6


TOL = Tolerances()

# Largest dA*dB accepted by tensor_power; dense operators beyond this are
# impractical to build.
MAX_JOINT_DIM = 4096


class MeasurementClass(str, enum.Enum):
    GLOBAL = "global"
    ONE_WAY = "one_way"
    TWO_WAY_TILDE = "two_way_tilde"
    SEPARABLE = "separable"

    @classmethod
    def parse(cls, name: str) -> "MeasurementClass":
        key = name.strip().lower().replace("-", "_")
        aliases = {
            "g": cls.GLOBAL,
            "->": cls.ONE_WAY,
            "one": cls.ONE_WAY,
            "oneway": cls.ONE_WAY,
            "two_way": cls.TWO_WAY_TILDE,
            "twoway": cls.TWO_WAY_TILDE,
            "<->": cls.TWO_WAY_TILDE,
            "sep": cls.SEPARABLE,
        }
        if key in aliases:
            return aliases[key]
        try:
            return cls(key)
        except ValueError:
            valid = ", ".join(c.value for c in cls)
            raise ValueError(f"unknown measurement class {name!r} (expected one of {valid})") from None


@dataclass(frozen=True)
class SchmidtSpectrum:
    """Sorted (non-increasing) probability vector of Schmidt coefficients."""

    lambdas: tuple

    def __init__(self, lambdas: Sequence[Any]):
        vals = tuple(lambdas)
        if len(vals) == 0:
            raise InstanceError("empty spectrum")
        object.__setattr__(self, "lambdas", vals)

    @classmethod
    def normalized(cls, values: Sequence[float]) -> "SchmidtSpectrum":
        """Sort non-increasing and rescale to unit sum."""
        arr = np.asarray(values, dtype=float)
        if arr.size == 0 or np.any(arr < 0) or arr.sum() <= 0:
            raise InstanceError("spectrum must be non-negative with positive sum")
        arr = np.sort(arr)[::-1] / arr.sum()
        return cls(tuple(float(x) for x in arr))

    @property
    def d(self) -> int:
        return len(self.lambdas)

    def as_array(self) -> np.ndarray:
        return np.array([float(x) for x in self.lambdas])

    def padded(self, n: int) -> np.ndarray:
        out = np.zeros(n)
        out[: self.d] = self.as_array()
        return out

    @property
    def rank(self) -> int:
        return int(sum(1 for x in self.lambdas if x > 0))

    def check(self, tol: float = TOL.structural) -> None:
        lam = self.lambdas
        for i, x in enumerate(lam):
            if not math.isfinite(float(x)):
                raise InstanceError(f"lambda_{i + 1} is not finite")
            if x < 0:
                raise InstanceError(f"negative entry: lambda_{i + 1} = {float(x)}")
        for i in range(len(lam) - 1):
            if lam[i] < lam[i + 1]:
                raise InstanceError(
                    f"unsorted spectrum: lambda_{i + 1} = {float(lam[i])} < lambda_{i + 2} = {float(lam[i + 1])}"
                )
        total = sum(lam)
        if abs(float(total) - 1.0) > tol:
            raise InstanceError(f"sum != 1: entries sum to {float(total)!r}")


@dataclass(frozen=True)
class TestInstance:
    """(dA, dB, spectrum): the full problem statement."""

    __test__ = False  # keep pytest from collecting this class

    d_a: int
    d_b: int
    spectrum: SchmidtSpectrum

    @classmethod
    def from_lambdas(cls, lambdas: Sequence[Any], d_a: Optional[int] = None, d_b: Optional[int] = None) -> "TestInstance":
        spec = lambdas if isinstance(lambdas, SchmidtSpectrum) else SchmidtSpectrum(lambdas)
        d_a = spec.d if d_a is None else d_a
        d_b = d_a if d_b is None else d_b
        return validate_instance(cls(int(d_a), int(d_b), spec))

    @property
    def d(self) -> int:
        return min(self.d_a, self.d_b)

    @property
    def joint_dim(self) -> int:
        return self.d_a * self.d_b

    @property
    def lambdas(self) -> np.ndarray:
        return self.spectrum.as_array()

    def budget(self, alpha: float) -> float:
        """alpha * dA * dB, the trace budget of T."""
        return float(alpha) * self.joint_dim

    def state_vector(self) -> np.ndarray:
        """|Psi> as a vector on C^dA (x) C^dB."""
        psi = np.zeros(self.joint_dim)
        for i, s in enumerate(schmidt_vector(self.spectrum)):
            psi[i * self.d_b + i] = s
        return psi

    def swapped(self) -> "TestInstance":
        return TestInstance(self.d_b, self.d_a, self.spectrum)


def validate_instance(instance: TestInstance, tol: float = TOL.structural) -> TestInstance:
    if instance.d_a < 1 or instance.d_b < 1:
        raise InstanceError(f"dimension mismatch: dA={instance.d_a}, dB={instance.d_b} must be >= 1")
    instance.spectrum.check(tol)
    if instance.spectrum.d > min(instance.d_a, instance.d_b):
        raise InstanceError(
            f"dimension mismatch: spectrum length {instance.spectrum.d} exceeds min(dA, dB) = {min(instance.d_a, instance.d_b)}"
        )
    return instance


def schmidt_vector(spectrum: SchmidtSpectrum) -> np.ndarray:
    return np.sqrt(spectrum.as_array())


def tensor_power(instance: TestInstance, n: int, cap: int = MAX_JOINT_DIM) -> TestInstance:
    if n < 1:
        raise ValueError("n must be >= 1")
    d_a, d_b = instance.d_a**n, instance.d_b**n
    if d_a * d_b > cap:
        raise InstanceError(f"dimension overflow: dA*dB = {d_a * d_b} exceeds cap {cap}")
    lam = list(instance.spectrum.lambdas)
    exact = all(isinstance(x, (int, Fraction)) for x in lam)
    prods = [Fraction(1) if exact else 1.0]
    for _ in range(n):
        prods = [p * x for p in prods for x in lam]
    prods.sort(reverse=True)
    if not exact:
        # products of a normalized vector sum to 1 only up to rounding
        total = math.fsum(prods)
        prods = [p / total for p in prods]
    return validate_instance(TestInstance(d_a, d_b, SchmidtSpectrum(prods)))


@dataclass(frozen=True)
class HermitianOperator:
    """Dense Hermitian matrix with its bipartite factorization (dA, dB)."""

    matrix: np.ndarray
    dims: tuple = (1, 1)

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        n = mat.shape[0]
        if mat.ndim != 2 or mat.shape[1] != n:
            raise ValueError("operator must be a square matrix")
        if self.dims[0] * self.dims[1] != n:
            if self.dims == (1, 1):
                object.__setattr__(self, "dims", (n, 1))
            else:
                raise ValueError(f"dims {self.dims} do not factor size {n}")
        if n and np.max(np.abs(mat - mat.conj().T)) > TOL.structural * max(1.0, np.max(np.abs(mat))):
            raise ValueError("operator is not Hermitian")
        object.__setattr__(self, "matrix", mat)

    @classmethod
    def diagonal(cls, diag, dims) -> "HermitianOperator":
        return cls(np.diag(np.asarray(diag, dtype=complex)), tuple(dims))

    @classmethod
    def projector(cls, vec, dims) -> "HermitianOperator":
        v = np.asarray(vec, dtype=complex)
        return cls(np.outer(v, v.conj()), tuple(dims))

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def expectation(self, vec) -> float:
        v = np.asarray(vec, dtype=complex)
        return float(np.real(v.conj() @ self.matrix @ v))

    def complement(self) -> "HermitianOperator":
        return HermitianOperator(np.eye(self.size) - self.matrix, self.dims)

    def partial_transpose(self) -> "HermitianOperator":
        """Transpose on the second (B) factor."""
        d_a, d_b = self.dims
        t = self.matrix.reshape(d_a, d_b, d_a, d_b).transpose(0, 3, 2, 1)
        return HermitianOperator(t.reshape(d_a * d_b, d_a * d_b), self.dims)

    def swap_parties(self) -> "HermitianOperator":
        d_a, d_b = self.dims
        t = self.matrix.reshape(d_a, d_b, d_a, d_b).transpose(1, 0, 3, 2)
        return HermitianOperator(t.reshape(d_a * d_b, d_a * d_b), (d_b, d_a))


@dataclass(frozen=True)
class TradeoffPoint:
    alpha: float
    beta: float
    povm_class: MeasurementClass
    certificate: Any = None
    certificate_ref: str = ""

    def __post_init__(self):
        if not (-TOL.structural <= self.alpha <= 1 + TOL.structural):
            raise ValueError(f"alpha={self.alpha} outside [0, 1]")
        if not (-TOL.structural <= self.beta <= 1 + TOL.structural):
            raise ValueError(f"beta={self.beta} outside [0, 1]")


@dataclass
class TradeoffCurve:
    povm_class: MeasurementClass
    points: list = field(default_factory=list)

    @property
    def alphas(self) -> np.ndarray:
        return np.array([p.alpha for p in self.points])

    @property
    def betas(self) -> np.ndarray:
        return np.array([p.beta for p in self.points])

    def is_monotone(self, tol: float = TOL.optimization) -> bool:
        order = np.argsort(self.alphas, kind="stable")
        return bool(np.all(np.diff(self.betas[order]) <= tol))


def clamp01(x: float) -> float:
    return min(1.0, max(0.0, float(x)))


def check_alpha(alpha) -> None:
    if not (0 <= alpha <= 1):
        raise ValueError(f"alpha={alpha} outside [0, 1]")


@dataclass(frozen=True)
class GlobalSolution:
    beta: float
    scale: float
    povm_T: HermitianOperator


def beta_global(instance: TestInstance, alpha) -> float:
    check_alpha(alpha)
    return clamp01(1.0 - min(1.0, instance.budget(alpha)))


def solve_global(instance: TestInstance, alpha) -> GlobalSolution:
    """Optimal unrestricted test: T = min(1, alpha dA dB)|Psi><Psi|."""
    beta = beta_global(instance, alpha)
    scale = min(1.0, instance.budget(alpha))
    psi = instance.state_vector()
    T = HermitianOperator(scale * np.outer(psi, psi).astype(complex), (instance.d_a, instance.d_b))
    return GlobalSolution(beta, scale, T)


def invert_tradeoff(
    curve: Callable[[float], float],
    beta_target: float,
    alpha_tol: float = 1e-10,
    beta_tol: float = TOL.optimization,
) -> float:
    """Smallest alpha in [0, 1] with curve(alpha) <= beta_target + beta_tol.

    ``curve`` must be non-increasing.  Bisection to ``alpha_tol``; the
    returned alpha is the feasible end of the final bracket.
    """
    lo_val, hi_val = curve(0.0), curve(1.0)
    if beta_target > lo_val + beta_tol or beta_target < hi_val - beta_tol:
        raise ValueError(f"target beta={beta_target} outside curve range [{hi_val}, {lo_val}]")
    if lo_val <= beta_target + beta_tol:
        return 0.0
    lo, hi = 0.0, 1.0
    while hi - lo > alpha_tol:
        mid = 0.5 * (lo + hi)
        if curve(mid) <= beta_target + beta_tol:
            hi = mid
        else:
            lo = mid
    return hi
