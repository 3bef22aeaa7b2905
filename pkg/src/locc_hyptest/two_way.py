"""Convex programs bounding three-step two-way LOCC tests.

Both programs share one shape.  Each row i has a support of column indices
and a multiplier |i|, and carries weights m_i^k >= 0 for k in its support.
The problem is

    maximize    sum_{i,k} lambda_k m_i^k
    subject to  sum_{i containing k} m_i^k <= 1         for every column k
                sum_i |i| q_i(m_i) <= alpha dA dB

with q_i = (sum_k lambda_k (m_i^k)^2) / (sum_k lambda_k m_i^k) (zero for an
all-zero row).  The triangular program uses rows {1..i} with multiplier i,
the power-set program uses every nonempty subset with multiplier |i|.
q_i is a quadratic-over-linear form, so the feasible set is convex and the
constraint is homogeneous of degree one.

The solver is a log-barrier Newton method (see ``_solve_barrier``).  Its result is compared against
the allocation that mixes the full rows {1..k-1} and {1..k}, which attains
the one-way value; the better of the two is returned, so the bound never
exceeds the one-way error.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .core import TestInstance, TOL, check_alpha, clamp01

DEFAULT_TOL = 1e-10
DEFAULT_MAX_STEPS = 100_000
MAX_POWERSET_DIM = 4
BARRIER_GROWTH = 50.0


class ConvergenceError(RuntimeError):
    """Iteration cap hit; ``incumbent`` holds the best feasible allocation."""

    def __init__(self, message, incumbent=None, success=None):
        super().__init__(message)
        self.incumbent = incumbent
        self.success = success


@dataclass(frozen=True)
class TriangularAllocation:
    """m[i, k] = m_{i+1}^{k+1} for 0 <= k <= i < n (0-based storage)."""

    m: np.ndarray

    def __post_init__(self):
        m = np.array(self.m, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("allocation must be a square array")
        if np.any(np.triu(m, 1) != 0):
            raise ValueError("allocation must be lower triangular")
        if np.any(m < -TOL.structural):
            raise ValueError("allocation has negative weights")
        m[m < 0] = 0.0
        object.__setattr__(self, "m", m)

    @classmethod
    def zeros(cls, n: int) -> "TriangularAllocation":
        return cls(np.zeros((n, n)))

    @property
    def n(self) -> int:
        return self.m.shape[0]

    def rows(self):
        for i in range(self.n):
            yield tuple(range(i + 1)), i + 1, self.m[i, : i + 1]

    def column_sums(self) -> np.ndarray:
        return self.m.sum(axis=0)


@dataclass(frozen=True)
class PowersetAllocation:
    """Weights keyed by 0-based subsets (sorted tuples)."""

    n: int
    weights: dict = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for subset, w in self.weights.items():
            key = tuple(sorted(subset))
            w = np.asarray(w, dtype=float)
            if len(key) == 0 or w.shape != (len(key),):
                raise ValueError(f"bad weights for subset {subset}")
            if key[-1] >= self.n or key[0] < 0:
                raise ValueError(f"subset {subset} out of range")
            if np.any(w < -TOL.structural):
                raise ValueError("allocation has negative weights")
            clean[key] = np.maximum(w, 0.0)
        object.__setattr__(self, "weights", clean)

    def rows(self):
        for key, w in self.weights.items():
            yield key, len(key), w

    def column_sums(self) -> np.ndarray:
        out = np.zeros(self.n)
        for key, w in self.weights.items():
            out[list(key)] += w
        return out


def _lam_for(spectrum, n: int) -> np.ndarray:
    lam = spectrum.padded(n) if hasattr(spectrum, "padded") else np.asarray(spectrum, dtype=float)
    if lam.size < n:
        lam = np.concatenate([lam, np.zeros(n - lam.size)])
    return lam


def constraint_value(alloc, spectrum) -> float:
    """sum_i |i| q_i, with q_i = 0 for an all-zero row."""
    lam = _lam_for(spectrum, alloc.n)
    total = 0.0
    for support, mult, w in alloc.rows():
        lk = lam[list(support)]
        den = float(lk @ w)
        num = float(lk @ (w * w))
        if den <= 0:
            if num > 0:
                raise ValueError("row with zero denominator and nonzero numerator")
            continue
        total += mult * num / den
    return total


def objective_value(alloc, spectrum) -> float:
    lam = _lam_for(spectrum, alloc.n)
    return float(sum(lam[list(s)] @ w for s, _, w in alloc.rows()))


class RowProgram:
    """Flattened variables of a row program with zero-lambda columns removed."""

    def __init__(self, lam, supports, multipliers):
        lam = np.asarray(lam, dtype=float)
        self.lam = lam
        self.ncol = lam.size
        self.supports = [tuple(s) for s in supports]
        self.multipliers = np.asarray(multipliers, dtype=float)
        rid, kid, row_map = [], [], []
        for r, s in enumerate(self.supports):
            live = [k for k in s if lam[k] > 0]
            if not live:
                continue
            row_map.append(r)
            rr = len(row_map) - 1
            rid.extend([rr] * len(live))
            kid.extend(live)
        self.row_map = np.array(row_map, dtype=int)  # compact row -> original row
        self.rid = np.array(rid, dtype=int)
        self.kid = np.array(kid, dtype=int)
        self.lv = lam[self.kid]
        self.mult = self.multipliers[self.row_map] if row_map else np.zeros(0)
        self.nrow = len(row_map)
        self.n = self.kid.size
        self.cols = np.unique(self.kid)
        col_pos = {k: j for j, k in enumerate(self.cols)}
        self.C = np.zeros((self.cols.size, self.n))
        self.C[[col_pos[k] for k in self.kid], np.arange(self.n)] = 1.0
        self.P = np.zeros((self.nrow, self.n))
        self.P[self.rid, np.arange(self.n)] = 1.0
        self.same_row = self.rid[:, None] == self.rid[None, :]

    def objective(self, x):
        return x @ self.lv

    def column_sums(self, x):
        return x @ self.C.T

    def constraint(self, x):
        """Vectorized over leading axes of x."""
        D = (x * self.lv) @ self.P.T
        N = (x * x * self.lv) @ self.P.T
        with np.errstate(invalid="ignore", divide="ignore"):
            q = np.where(D > 0, N / np.where(D > 0, D, 1.0), 0.0)
        return q @ self.mult

    def feasible(self, x, budget, tol=TOL.optimization):
        return bool(
            np.all(x >= -tol)
            and np.all(self.column_sums(x) <= 1 + tol)
            and self.constraint(x) <= budget + tol
        )

    def scatter(self, x):
        """Per original row: dict column -> weight."""
        out = [dict() for _ in self.supports]
        for j in range(self.n):
            out[self.row_map[self.rid[j]]][int(self.kid[j])] = float(x[j])
        return out

    def var_index(self, row: int, col: int) -> int:
        compact = np.nonzero(self.row_map == row)[0]
        if compact.size == 0:
            raise KeyError(row)
        hits = np.nonzero((self.rid == compact[0]) & (self.kid == col))[0]
        if hits.size == 0:
            raise KeyError((row, col))
        return int(hits[0])


@dataclass
class SolveInfo:
    success: float
    x: np.ndarray
    gap_bound: float
    newton_steps: int
    source: str  # "barrier" or "one_way_mixture"


def _chain_mixture(prog: RowProgram, chain_rows, budget: float) -> np.ndarray:
    """Feasible point mixing full rows {1..k-1} and {1..k}.

    By convexity of the constraint the mixture costs at most the budget, and
    its objective equals the greedy one-way value.
    """
    x = np.zeros(prog.n)
    r = int(np.count_nonzero(prog.lam > 0))
    a = min(budget, float(r))
    k = int(math.floor(a + TOL.structural))
    theta = max(0.0, a - k)

    def full_row(kk):
        v = np.zeros(prog.n)
        row = chain_rows[kk - 1]
        for col in range(kk):
            if prog.lam[col] > 0:
                v[prog.var_index(row, col)] = 1.0
        return v

    if k == 0:
        x[prog.var_index(chain_rows[0], 0)] = theta
        return x
    x = full_row(k)
    if theta > 0 and k < r:
        x = (1 - theta) * x + theta * full_row(k + 1)
    return x


def _solve_barrier(prog: RowProgram, budget: float, tol: float, max_steps: int):
    """Log-barrier Newton method on the epigraph form.

    Each row gets a variable s_r >= q_r, written as the rotated cone
    s_r D_r - N_r >= 0 (D_r, N_r the denominator and numerator of q_r), and
    the budget becomes the linear constraint sum_r |r| s_r <= budget.  The
    cone barrier is self-concordant, which keeps Newton well behaved when
    rows shrink towards zero.
    """
    n, R = prog.n, prog.nrow
    rid, lv, mult, C = prog.rid, prog.lv, prog.mult, prog.C
    CT = C.T
    x = np.ones(n)
    x *= 0.5 * min(budget / prog.constraint(x), 1.0 / C.sum(axis=1).max())
    s = 1.5 * np.bincount(rid, lv * x * x, R) / np.bincount(rid, lv * x, R)
    nu = n + C.shape[0] + 1 + 2 * R  # barrier parameter

    def parts(x, s):
        D = np.bincount(rid, lv * x, R)
        N = np.bincount(rid, lv * x * x, R)
        return D, s * D - N

    def barrier(x, s, t):
        _, h = parts(x, s)
        slack = budget - mult @ s
        cs = 1 - C @ x
        if slack <= 0 or np.any(h <= 0) or np.any(cs <= 0) or np.any(x <= 0):
            return math.inf
        return -t * (lv @ x) - np.log(h).sum() - math.log(slack) - np.log(cs).sum() - np.log(x).sum()

    t = 1.0
    steps = 0
    while True:
        f0 = barrier(x, s, t)
        for _ in range(100):
            D, h = parts(x, s)
            slack = budget - mult @ s
            cs = 1 - C @ x
            hv = h[rid]
            a = lv * (s[rid] - 2 * x)  # dh_r/dx_j
            gx = -t * lv - a / hv + CT @ (1 / cs) - 1 / x
            gs = -D / h + mult / slack
            Hxx = prog.same_row * np.outer(a / hv, a / hv)
            Hxx[np.diag_indices(n)] += 2 * lv / hv + 1 / x**2
            Hxx += (CT / cs**2) @ C
            Hxs = np.zeros((n, R))
            Hxs[np.arange(n), rid] = a * D[rid] / hv**2 - lv / hv
            Hss = np.diag(D**2 / h**2) + np.outer(mult, mult) / slack**2
            H = np.block([[Hxx, Hxs], [Hxs.T, Hss]])
            g = np.concatenate([gx, gs])
            try:
                dz = -np.linalg.solve(H, g)
            except np.linalg.LinAlgError:
                dz = -np.linalg.lstsq(H, g, rcond=None)[0]
            dec = -g @ dz
            steps += 1
            if steps > max_steps:
                raise ConvergenceError(
                    f"barrier solver exceeded {max_steps} Newton steps",
                    incumbent=x, success=float(lv @ x),
                )
            # the decrement cannot resolve below rounding of the t-scaled objective
            if not np.isfinite(dec) or dec / 2 < max(1e-10, 1e-14 * t):
                break
            step = 1.0
            while step > 1e-20:
                xn, sn = x + step * dz[:n], s + step * dz[n:]
                f1 = barrier(xn, sn, t)
                if f1 <= f0 - 0.25 * step * dec:
                    break
                step *= 0.5
            else:
                break
            x, s, f0 = xn, sn, f1
        if nu / t < tol:
            break
        t *= BARRIER_GROWTH
    return x, nu / t, steps


def solve_rows(lam, supports, multipliers, budget: float, chain_rows,
               tol: float = DEFAULT_TOL, max_steps: int = DEFAULT_MAX_STEPS) -> tuple:
    prog = RowProgram(lam, supports, multipliers)
    if budget <= 0 or prog.n == 0:
        return prog, SolveInfo(0.0, np.zeros(prog.n), 0.0, 0, "one_way_mixture")
    ref = _chain_mixture(prog, chain_rows, budget)
    ref_val = prog.objective(ref)
    total = prog.lam.sum()
    if ref_val >= total - TOL.structural:
        return prog, SolveInfo(float(ref_val), ref, 0.0, 0, "one_way_mixture")
    x, gap, steps = _solve_barrier(prog, budget, tol, max_steps)
    val = prog.objective(x)
    if val > ref_val:
        return prog, SolveInfo(float(val), x, gap, steps, "barrier")
    return prog, SolveInfo(float(ref_val), ref, gap, steps, "one_way_mixture")


def triangular_rows(n: int):
    return [tuple(range(i + 1)) for i in range(n)], [i + 1 for i in range(n)]


def powerset_rows(n: int):
    supports = [s for r in range(1, n + 1) for s in itertools.combinations(range(n), r)]
    return supports, [len(s) for s in supports]


@dataclass(frozen=True)
class TwoWaySolution:
    beta: float
    allocation: object
    gap_bound: float
    newton_steps: int
    source: str


def solve_two_way(instance: TestInstance, alpha, tol: float = DEFAULT_TOL,
                  max_steps: int = DEFAULT_MAX_STEPS) -> TwoWaySolution:
    """beta-tilde from the triangular program."""
    check_alpha(alpha)
    n = instance.d_a
    lam = instance.spectrum.padded(n)
    supports, mults = triangular_rows(n)
    prog, info = solve_rows(lam, supports, mults, instance.budget(alpha), list(range(n)), tol, max_steps)
    m = np.zeros((n, n))
    for i, row in enumerate(prog.scatter(info.x)):
        for k, w in row.items():
            m[i, k] = w
    alloc = TriangularAllocation(np.maximum(m, 0.0))
    return TwoWaySolution(clamp01(1.0 - info.success), alloc, info.gap_bound, info.newton_steps, info.source)


def solve_two_way_powerset(instance: TestInstance, alpha, tol: float = DEFAULT_TOL,
                           max_steps: int = DEFAULT_MAX_STEPS) -> TwoWaySolution:
    check_alpha(alpha)
    n = instance.d_a
    if n > MAX_POWERSET_DIM:
        raise ValueError(f"power-set program limited to dA <= {MAX_POWERSET_DIM} (got {n})")
    lam = instance.spectrum.padded(n)
    supports, mults = powerset_rows(n)
    chain = [supports.index(tuple(range(k))) for k in range(1, n + 1)]
    prog, info = solve_rows(lam, supports, mults, instance.budget(alpha), chain, tol, max_steps)
    weights = {}
    for s, row in zip(supports, prog.scatter(info.x)):
        if row:
            weights[s] = np.array([max(0.0, row.get(k, 0.0)) for k in s])
    alloc = PowersetAllocation(n, weights)
    return TwoWaySolution(clamp01(1.0 - info.success), alloc, info.gap_bound, info.newton_steps, info.source)


def beta_two_way(instance: TestInstance, alpha, tol: float = DEFAULT_TOL) -> float:
    return solve_two_way(instance, alpha, tol).beta


def active_rows(alloc, eps: float = 1e-9) -> list:
    """1-based indices (triangular) or subsets (power set) of nonzero rows."""
    if isinstance(alloc, TriangularAllocation):
        return [i + 1 for i in range(alloc.n) if alloc.m[i].max(initial=0) > eps]
    return [tuple(k + 1 for k in s) for s, w in alloc.weights.items() if w.max(initial=0) > eps]
