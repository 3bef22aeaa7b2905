"""Evaluate beta(alpha) for every measurement class and assemble curves."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Iterable, Sequence

import numpy as np

from .core import (
    TOL,
    MeasurementClass,
    TestInstance,
    TradeoffCurve,
    TradeoffPoint,
    invert_tradeoff,
    solve_global,
)
from .one_way import beta_one_way, optimal_one_way_povm
from .separable import beta_separable
from .two_way import DEFAULT_TOL, active_rows, solve_two_way

ALL_CLASSES = (
    MeasurementClass.ONE_WAY,
    MeasurementClass.TWO_WAY_TILDE,
    MeasurementClass.SEPARABLE,
    MeasurementClass.GLOBAL,
)


def _fmt(x: float) -> str:
    return format(float(x), ".6g")


def solve_point(instance: TestInstance, alpha: float, cls: MeasurementClass,
                with_certificate: bool = True, tol: float = DEFAULT_TOL) -> TradeoffPoint:
    cls = MeasurementClass(cls)
    if cls is MeasurementClass.GLOBAL:
        sol = solve_global(instance, alpha)
        cert = sol.povm_T if with_certificate else None
        return TradeoffPoint(alpha, sol.beta, cls, cert, f"scale={_fmt(sol.scale)}")
    if cls is MeasurementClass.ONE_WAY:
        sol = beta_one_way(instance, alpha)
        cert = optimal_one_way_povm(instance, alpha) if with_certificate else None
        return TradeoffPoint(alpha, sol.beta, cls, cert, f"c={sol.c};m_c={_fmt(sol.m_c)}")
    if cls is MeasurementClass.TWO_WAY_TILDE:
        sol = solve_two_way(instance, alpha, tol=tol)
        rows = ",".join(str(r) for r in active_rows(sol.allocation))
        cert = sol.allocation if with_certificate else None
        return TradeoffPoint(alpha, sol.beta, cls, cert, f"rows={rows};source={sol.source}")
    sol = beta_separable(instance, alpha)
    cert = sol.povm_T if with_certificate else None
    return TradeoffPoint(alpha, sol.beta, cls, cert, f"eta={sol.eta};branch={sol.branch}")


def beta_of(instance: TestInstance, alpha: float, cls: MeasurementClass, tol: float = DEFAULT_TOL) -> float:
    return solve_point(instance, alpha, cls, with_certificate=False, tol=tol).beta


def _task(args):
    instance, alpha, cls, tol = args
    return solve_point(instance, alpha, cls, with_certificate=False, tol=tol)


def sweep(instance: TestInstance, alphas: Iterable[float], classes: Sequence = ALL_CLASSES,
          jobs: int = 1, tol: float = DEFAULT_TOL) -> list:
    """Points ordered by alpha then by the order of ``classes``."""
    tasks = [(instance, float(a), MeasurementClass(c), tol) for a in alphas for c in classes]
    return run_tasks(tasks, jobs)


def run_tasks(tasks: list, jobs: int = 1) -> list:
    if jobs <= 1 or len(tasks) < 2:
        return [_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        # map preserves submission order
        return list(pool.map(_task, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))


def curves(points: Sequence[TradeoffPoint]) -> dict:
    out: dict = {}
    for p in points:
        out.setdefault(p.povm_class, TradeoffCurve(p.povm_class)).points.append(p)
    return out


def zero_error_alpha(instance: TestInstance, cls: MeasurementClass) -> float:
    """Closed-form smallest alpha with beta = 0 (global, one-way, separable)."""
    cls = MeasurementClass(cls)
    n = instance.joint_dim
    if cls is MeasurementClass.GLOBAL:
        return 1.0 / n
    if cls is MeasurementClass.ONE_WAY:
        return instance.spectrum.rank / n
    if cls is MeasurementClass.SEPARABLE:
        return float(np.sqrt(instance.lambdas).sum()) ** 2 / n
    raise ValueError(f"no closed form for {cls.value}")


def breakpoints(instance: TestInstance) -> list:
    """alpha values where some curve changes regime."""
    n = instance.joint_dim
    pts = {0.0, 1.0 / n, 1.0 / max(instance.d_a, instance.d_b)}
    pts.add(instance.spectrum.rank / n)
    pts.add(zero_error_alpha(instance, MeasurementClass.SEPARABLE))
    return sorted(p for p in pts if 0 <= p <= 1)


def merge_grid(grid: Iterable[float], extra: Iterable[float], tol: float = 1e-12) -> list:
    """Sorted union; extra points replace grid points within ``tol``."""
    extra = sorted(set(float(x) for x in extra))
    out = list(extra)
    for g in grid:
        g = float(g)
        if all(abs(g - e) > tol for e in extra):
            out.append(g)
    return sorted(out)


def invert(instance: TestInstance, cls: MeasurementClass, beta_target: float,
           tol: float = DEFAULT_TOL) -> float:
    """alpha_C(beta): smallest alpha reaching beta_target, by bisection.

    The separable curve reaches zero quadratically, so near beta = 0 the
    bisection resolves alpha only to about sqrt(beta tolerance).
    """
    cls = MeasurementClass(cls)
    if not (0.0 <= beta_target <= 1.0):
        raise ValueError(f"target beta={beta_target} outside [0, 1]")
    return invert_tradeoff(lambda a: beta_of(instance, a, cls, tol), beta_target, beta_tol=TOL.structural)
