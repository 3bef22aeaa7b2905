"""Independent checks of the closed forms and the two-way solver.

Each oracle computes a lower bound on the maximum that the analytic code
claims (every candidate is checked feasible before it is scored).  A claimed
optimum below an oracle value is a failure; a claimed optimum above an
inexact oracle is only inconclusive.
"""

from __future__ import annotations

import enum
import itertools
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .composite import CompositeInstance, solve_x_epsilon
from .core import HermitianOperator, TestInstance, TOL
from .one_way import beta_one_way
from .two_way import RowProgram, solve_two_way, triangular_rows

MAX_ENUM_DIM = 10  # active-set enumeration of the X_eps oracle (2^(d+1) sets)
MAX_VERTEX_DIM = 20  # knapsack vertex enumeration


class Status(str, enum.Enum):
    AGREE = "agree"
    DISAGREE = "disagree"
    INCONCLUSIVE = "inconclusive"


@dataclass
class OracleReport:
    target: str
    analytic_value: float
    oracle_value: float
    gap: float
    restarts_used: int
    status: Status
    tolerance: float
    seed: int = 0
    detail: dict = field(default_factory=dict)

    def to_json(self) -> str:
        out = asdict(self)
        out["status"] = self.status.value
        return json.dumps(out, sort_keys=True)

    @property
    def ok(self) -> bool:
        return self.status is Status.AGREE


def classify(analytic: float, oracle: float, tol: float, exact: bool) -> Status:
    """agree iff |analytic - oracle| <= tol.

    The analytic value is a claimed maximum and the oracle a lower bound, so
    analytic < oracle - tol always disagrees.  Above the oracle it
    disagrees only if the oracle is exact.
    """
    gap = analytic - oracle
    if abs(gap) <= tol:
        return Status.AGREE
    if gap < 0 or exact:
        return Status.DISAGREE
    return Status.INCONCLUSIVE


def _report(target, analytic, oracle, tol, exact, restarts, seed, **detail) -> OracleReport:
    return OracleReport(
        target=target,
        analytic_value=float(analytic),
        oracle_value=float(oracle),
        gap=float(analytic - oracle),
        restarts_used=int(restarts),
        status=classify(analytic, oracle, tol, exact),
        tolerance=float(tol),
        seed=int(seed),
        detail=detail,
    )


# X_eps -----------------------------------------------------------------


def _ordered_constraints(d: int, eps: float):
    """A x <= b: x_{i+1} <= x_i, x_d >= 0, <phi_d|x> <= eps."""
    A = np.zeros((d + 1, d))
    for i in range(d - 1):
        A[i, i], A[i, i + 1] = -1.0, 1.0
    A[d - 1, d - 1] = -1.0
    A[d] = 1.0 / math.sqrt(d)
    b = np.zeros(d + 1)
    b[d] = eps
    return A, b


def _enumerate_active_sets(psi: np.ndarray, eps: float, feas_tol: float = 1e-9) -> float:
    """Exact max of <psi|x> over the ordered cone, the eps face and the unit ball.

    For every set J of active linear constraints the KKT point is either a
    vertex of {A_J x = b_J} or the point of that affine set on the unit
    sphere in the direction of psi's projection.
    """
    d = psi.size
    A, b = _ordered_constraints(d, eps)
    best = -math.inf
    for k in range(len(b) + 1):
        for J in itertools.combinations(range(len(b)), k):
            if J:
                AJ, bJ = A[list(J)], b[list(J)]
                x0 = np.linalg.lstsq(AJ, bJ, rcond=None)[0]
                if np.linalg.norm(AJ @ x0 - bJ) > 1e-10:
                    continue
                _, sv, vt = np.linalg.svd(AJ)
                null = vt[int(np.sum(sv > 1e-12)):].T
            else:
                x0, null = np.zeros(d), np.eye(d)
            cands = []
            if null.shape[1] == 0:
                cands.append(x0)
            else:
                proj = null.T @ psi
                rest = 1.0 - x0 @ x0
                if rest >= 0 and np.linalg.norm(proj) > 1e-14:
                    cands.append(x0 + math.sqrt(rest) * null @ proj / np.linalg.norm(proj))
                cands.append(x0)
            for x in cands:
                if x @ x <= 1 + feas_tol and np.all(A @ x <= b + feas_tol):
                    best = max(best, float(psi @ x))
    return max(best, 0.0)


def _sample_ordered(rng, d: int, eps: float, count: int) -> np.ndarray:
    """Random feasible points, pushed out to the binding face."""
    inc = rng.exponential(size=(count, d)) * (rng.random((count, d)) < 0.7)
    x = np.cumsum(inc[:, ::-1], axis=1)[:, ::-1]
    norm = np.linalg.norm(x, axis=1)
    tot = x.sum(axis=1) / math.sqrt(d)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.minimum(np.where(norm > 0, 1 / norm, 0), np.where(tot > 0, eps / tot, np.inf))
    return x * scale[:, None]


def oracle_x_epsilon(psi, epsilon, restarts: int = 200, tol: float = TOL.oracle, seed: int = 0) -> OracleReport:
    inst = CompositeInstance(np.asarray(psi), epsilon)
    analytic = solve_x_epsilon(inst, None).value
    rng = np.random.default_rng(seed)
    samples = _sample_ordered(rng, inst.d, inst.epsilon, restarts)
    sampled = float(np.max(samples @ inst.psi, initial=0.0)) ** 2
    exact = inst.d <= MAX_ENUM_DIM
    enum_val = _enumerate_active_sets(inst.psi, inst.epsilon) ** 2 if exact else -math.inf
    oracle = max(sampled, enum_val)
    return _report("x_epsilon", analytic, oracle, tol, exact, restarts, seed,
                   d=inst.d, epsilon=inst.epsilon, sampled=sampled)


# one-way ----------------------------------------------------------------


def _knapsack_vertices_max(lam: np.ndarray, budget: float, chunk_bits: int = 12) -> float:
    """max lam.m over vertices of {0 <= m <= 1, sum m <= budget}.

    Vertices have every coordinate in {0, 1} except at most one, which is
    then fixed by sum m = budget.
    """
    d = lam.size
    low = min(d, chunk_bits)
    base = ((np.arange(2**low)[:, None] >> np.arange(low)[None, :]) & 1).astype(float)
    best = 0.0
    for hi in range(2 ** (d - low)):
        high = ((hi >> np.arange(d - low)) & 1).astype(float)
        B = np.hstack([base, np.broadcast_to(high, (base.shape[0], d - low))])
        sums = B.sum(axis=1)
        ok = sums <= budget + 1e-12
        if ok.any():
            best = max(best, float((B[ok] @ lam).max()))
        # one fractional coordinate j, the others binary
        val = B @ lam
        for j in range(d):
            rest = sums - B[:, j]
            frac = budget - rest
            good = (frac >= -1e-12) & (frac <= 1 + 1e-12)
            if good.any():
                v = val - B[:, j] * lam[j] + np.clip(frac, 0, 1) * lam[j]
                best = max(best, float(v[good].max()))
    return best


def oracle_one_way(instance: TestInstance, alpha, samples: int = 2000, tol: float = TOL.optimization, seed: int = 0) -> OracleReport:
    lam = instance.spectrum.padded(instance.d)
    budget = instance.budget(alpha)
    analytic = 1.0 - beta_one_way(instance, alpha).beta
    rng = np.random.default_rng(seed)
    m = rng.random((samples, lam.size)) ** rng.uniform(0.2, 3.0, size=(samples, 1))
    s = m.sum(axis=1)
    m *= np.minimum(1.0, budget / np.where(s > 0, s, 1.0))[:, None]
    sampled = float(np.max(m @ lam, initial=0.0))
    exact = lam.size <= MAX_VERTEX_DIM
    vert = _knapsack_vertices_max(lam, budget) if exact else -math.inf
    oracle = max(sampled, vert)
    return _report("one_way", analytic, oracle, tol, exact, samples, seed,
                   alpha=float(alpha), sampled=sampled)


# two-way ----------------------------------------------------------------


def sample_triangular(prog: RowProgram, budget: float, samples: int, rng) -> np.ndarray:
    """Random feasible points of a row program.

    Each column's weights are drawn on the simplex (saturated with
    probability 1/2, else with slack), then the whole point is scaled by
    min(1, budget / constraint), which is feasible by homogeneity.
    """
    X = np.zeros((samples, prog.n))
    for col in prog.cols:
        idx = np.nonzero(prog.kid == col)[0]
        w = rng.dirichlet(np.full(idx.size + 1, rng.choice([0.3, 1.0])), size=samples)
        sat = rng.random(samples) < 0.5
        w[sat, -1] = 0.0
        w[sat] /= w[sat].sum(axis=1, keepdims=True)
        X[:, idx] = w[:, :-1]
    g = prog.constraint(X)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(g > budget, budget / g, 1.0)
    return X * scale[:, None]


def _project(prog: RowProgram, X: np.ndarray, budget: float) -> np.ndarray:
    X = np.maximum(X, 0.0)
    cs = X @ prog.C.T
    X = X / np.maximum(cs, 1.0)[:, prog.cols.searchsorted(prog.kid)]
    g = prog.constraint(X)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(g > budget, budget / g, 1.0)
    return X * scale[:, None]


def refine_samples(prog: RowProgram, X: np.ndarray, budget: float, rounds: int, rng) -> np.ndarray:
    """Random local search: perturb, project back, keep improvements."""
    best = X @ prog.lv
    for r in range(rounds):
        sigma = 0.5 * (1e-3 / 0.5) ** (r / max(1, rounds - 1))
        z = rng.normal(size=X.shape)
        revive = (rng.random(X.shape) < 0.05) * sigma * np.abs(rng.normal(size=X.shape))
        Y = _project(prog, X * np.exp(sigma * z) + revive, budget)
        val = Y @ prog.lv
        better = val > best
        X[better], best[better] = Y[better], val[better]
    return X


def oracle_two_way_sampling(instance: TestInstance, alpha, samples: int = 100_000, tol: float = 1e-3,
                            seed: int = 0, batch: int = 20_000, refine_rounds: int = 2000,
                            population: int = 64) -> OracleReport:
    sol = solve_two_way(instance, alpha)
    analytic = 1.0 - sol.beta
    n = instance.d_a
    supports, mults = triangular_rows(n)
    prog = RowProgram(instance.spectrum.padded(n), supports, mults)
    budget = instance.budget(alpha)
    rng = np.random.default_rng(seed)
    best = 0.0
    done = 0
    pool = np.zeros((0, prog.n))
    while done < samples and prog.n:
        k = min(batch, samples - done)
        X = np.vstack([pool, sample_triangular(prog, budget, k, rng)])
        vals = X @ prog.lv
        pool = X[np.argsort(vals)[::-1][:population]]
        best = max(best, float(vals.max()))
        done += k
    if refine_rounds and prog.n:
        pool = refine_samples(prog, pool, budget, refine_rounds, rng)
        feasible = [x for x in pool if prog.feasible(x, budget)]
        if feasible:
            best = max(best, float((np.array(feasible) @ prog.lv).max()))
    rep = _report("two_way", analytic, best, tol, False, samples, seed, alpha=float(alpha))
    if best > analytic + TOL.optimization:
        rep.status = Status.DISAGREE
    return rep


# operator checks ----------------------------------------------------------


def ppt_check(T: HermitianOperator, tol: float = TOL.optimization) -> bool:
    if T.dims[0] * T.dims[1] != T.size:
        raise ValueError("operator lacks bipartite dimensions")
    return bool(T.partial_transpose().eigenvalues().min() >= -tol)


@dataclass(frozen=True)
class PovmValidity:
    alpha_T: float
    beta_T: float
    min_eig: float
    max_eig: float
    trace: float
    within_budget: bool
    bounded: bool

    @property
    def ok(self) -> bool:
        return self.within_budget and self.bounded


def povm_validity(T: HermitianOperator, instance: TestInstance, alpha, tol: float = TOL.optimization) -> PovmValidity:
    ev = T.eigenvalues()
    tr = T.trace()
    return PovmValidity(
        alpha_T=tr / instance.joint_dim,
        beta_T=1.0 - T.expectation(instance.state_vector()),
        min_eig=float(ev.min()),
        max_eig=float(ev.max()),
        trace=tr,
        within_budget=tr <= instance.budget(alpha) + tol,
        bounded=bool(ev.min() >= -tol and ev.max() <= 1 + tol),
    )


# suites -------------------------------------------------------------------


def certificate_report(instance: TestInstance, alpha, tol: float = TOL.optimization) -> OracleReport:
    """Check the separable certificate: valid POVM, PPT, achieves 1 - beta_sep."""
    from .separable import beta_separable

    sol = beta_separable(instance, alpha)
    T = sol.povm_T
    validity = povm_validity(T, instance, alpha, tol)
    ppt = ppt_check(T, tol) and ppt_check(T.complement(), tol)
    achieved = 1.0 - validity.beta_T
    rep = _report("separable_certificate", 1.0 - sol.beta, achieved, tol, True, 0, 0,
                  alpha=float(alpha), eta=sol.eta, branch=sol.branch, ppt=ppt,
                  trace=validity.trace, bounded=validity.bounded)
    if not (ppt and validity.ok):
        rep.status = Status.DISAGREE
    return rep


def two_way_certificate_report(instance: TestInstance, alpha, tol: float = TOL.optimization) -> OracleReport:
    """Recompute the returned allocation's objective and check it is feasible."""
    from .two_way import constraint_value, objective_value

    sol = solve_two_way(instance, alpha)
    alloc = sol.allocation
    cons = constraint_value(alloc, instance.spectrum)
    cols = alloc.column_sums()
    obj = objective_value(alloc, instance.spectrum)
    feasible = cons <= instance.budget(alpha) + tol and bool(np.all(cols <= 1 + tol))
    rep = _report("two_way_certificate", 1.0 - sol.beta, obj, tol, True, 0, 0,
                  alpha=float(alpha), constraint=cons, budget=instance.budget(alpha))
    if not feasible:
        rep.status = Status.DISAGREE
    return rep


def verify_instance(instance: TestInstance, alphas, tol=None, seed: int = 0,
                    two_way_samples: int = 50_000) -> list:
    """All oracle reports for one instance over ``alphas``.

    ``tol`` (if given) replaces every per-oracle default tolerance.  Oracles
    whose exhaustive part would be too large for the instance are skipped.
    """
    reports = []
    tag = {"lambda": [float(x) for x in instance.spectrum.lambdas], "dims": [instance.d_a, instance.d_b]}
    d_small = min(instance.d_a, instance.d_b)
    for a in alphas:
        a = float(a)
        reports.append(oracle_one_way(instance, a, tol=tol or TOL.optimization, seed=seed))
        if d_small <= MAX_ENUM_DIM:
            inst = instance if instance.d_a <= instance.d_b else instance.swapped()
            psi = np.zeros(inst.d_a)
            psi[: inst.spectrum.d] = np.sqrt(inst.lambdas)
            eps = min(1.0, math.sqrt(a * inst.d_b))
            rep = oracle_x_epsilon(psi, eps, tol=tol or TOL.oracle, seed=seed)
            rep.detail["alpha"] = a
            reports.append(rep)
        if instance.d_a <= 3:
            reports.append(oracle_two_way_sampling(instance, a, samples=two_way_samples,
                                                   tol=tol or 1e-3, seed=seed))
        reports.append(two_way_certificate_report(instance, a, tol=tol or TOL.optimization))
        reports.append(certificate_report(instance, a, tol=tol or TOL.optimization))
    for r in reports:
        r.detail.update(tag)
    return reports
