"""Optimal one-way LOCC test (A -> B) in closed form.

The one-way problem reduces to a classical knapsack: maximize
sum_i lambda_i m_i with 0 <= m_i <= 1 and sum_i m_i <= alpha dA dB, which the
greedy fill solves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import HermitianOperator, TestInstance, check_alpha, clamp01, TOL


@dataclass(frozen=True)
class OneWaySolution:
    beta: float
    c: int  # 1-based cutoff index
    m_c: float
    diag_weights: np.ndarray


def _floor_budget(instance: TestInstance, alpha) -> tuple:
    """Return (floor(x), x) for x = alpha dA dB.

    Exact for int/Fraction alpha; for floats, values within 1e-12 of an
    integer snap to it so breakpoints land deterministically.
    """
    if isinstance(alpha, (int, Fraction)):
        x = Fraction(alpha) * instance.joint_dim
        return math.floor(x), x
    x = float(alpha) * instance.joint_dim
    r = round(x)
    if abs(x - r) <= TOL.structural * max(1.0, abs(x)):
        return int(r), float(r)
    return math.floor(x), x


def beta_one_way(instance: TestInstance, alpha) -> OneWaySolution:
    check_alpha(alpha)
    d = instance.d
    lam = instance.spectrum.padded(d)
    fl, x = _floor_budget(instance, alpha)
    c = min(d, fl + 1)
    m_c = float(min(1, x - c + 1))
    weights = np.zeros(d)
    weights[: c - 1] = 1.0
    weights[c - 1] = m_c
    beta = math.fsum(lam[c - 1 :]) - m_c * lam[c - 1]
    return OneWaySolution(clamp01(beta), c, m_c, weights)


def optimal_one_way_povm(instance: TestInstance, alpha) -> HermitianOperator:
    """T = sum_{i<c} |ii><ii| + m_c |cc><cc|."""
    sol = beta_one_way(instance, alpha)
    diag = np.zeros(instance.joint_dim)
    for i, w in enumerate(sol.diag_weights):
        diag[i * instance.d_b + i] = w
    return HermitianOperator.diagonal(diag, (instance.d_a, instance.d_b))
