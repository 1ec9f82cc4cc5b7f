"""Poisson threshold bound behind the no-communication vertex cover.

For ``Y ~ Poisson(lam)`` and any ``F`` in [0, 1] with ``E[F Y] >= lam / 2``,
the smallest possible ``E[F]`` is attained by the threshold variable ``F*``:
0 up to the median ``m``, ``1 - beta`` at ``m + 1`` and 1 above. This module
evaluates ``E[F*] / P(Y != 0)`` and finds its minimum over ``lam``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import bisect
from scipy.special import gammaln

__all__ = [
    "BOUND",
    "lambda_of_p",
    "pmf",
    "PoissonPoint",
    "evaluate_point",
    "lambda_boundaries",
    "RatioCurve",
    "ratio_curve",
    "RatioMinimum",
    "minimize_ratio",
    "feasible_perturbations",
    "threshold_bound_check",
]

#: rounded constant of the global bound, ratio >= 1 / BOUND
BOUND = 3.44
_TAIL = 1e-18


def lambda_of_p(p: float) -> float:
    """Poisson mean with ``exp(-lam) = 1 - p``."""
    p = float(p)
    if not (0.0 < p < 1.0):
        raise ValueError(f"p must lie in (0, 1), got {p}")
    return -math.log1p(-p)


def pmf(lam: float, kmin: int = 0) -> list[float]:
    """``q_0, q_1, ...`` by ``q_{k+1} = q_k lam / (k + 1)``, cut once past the
    mode and below ``1e-18`` of the largest term (and at least up to ``kmin``)."""
    if lam <= 0:
        raise ValueError("lam must be positive")
    # recurrence in log space so large means neither underflow nor overflow
    step = math.log(lam)
    logs = [-lam]
    peak = logs[0]
    k = 0
    while k < kmin or k < lam or logs[-1] >= peak + math.log(_TAIL):
        logs.append(logs[-1] + step - math.log(k + 1))
        peak = max(peak, logs[-1])
        k += 1
    q = [math.exp(x) for x in logs]
    return q


@dataclass(frozen=True)
class PoissonPoint:
    lam: float
    m: int
    beta: float
    exp_f: float
    exp_fy: float
    ratio: float

    def check(self) -> None:
        q = pmf(self.lam, self.m + 2)
        lhs = math.fsum(q[: self.m]) + self.beta * q[self.m]
        if abs(lhs - 0.5) > 1e-12:
            raise ArithmeticError(f"median equation off by {lhs - 0.5:.3g} at lam={self.lam}")
        if not (0.0 < self.beta <= 1.0):
            raise ArithmeticError(f"beta={self.beta} outside (0, 1] at lam={self.lam}")
        if abs(self.exp_fy - self.lam / 2) > 1e-9:
            raise ArithmeticError(f"E[F* Y] - lam/2 = {self.exp_fy - self.lam / 2:.3g} at lam={self.lam}")


def evaluate_point(lam: float) -> PoissonPoint:
    """Median, ``beta``, ``E[F*]``, ``E[F* Y]`` and the ratio at ``lam``."""
    lam = float(lam)
    if not lam > 0:
        raise ValueError(f"lam must be positive, got {lam}")
    q = pmf(lam)
    cdf = 0.0
    m = 0
    while True:
        if m + 1 >= len(q):
            q = pmf(lam, m + 2)
        nxt = math.fsum(q[: m + 1])
        if nxt >= 0.5:
            break
        cdf = nxt
        m += 1
    q = pmf(lam, m + 2)
    beta = (0.5 - cdf) / q[m]
    beta = min(beta, 1.0)
    exp_f = 1.0 - math.fsum(q[: m + 1]) - beta * q[m + 1]
    exp_fy = math.fsum([(1.0 - beta) * (m + 1) * q[m + 1]] + [k * q[k] for k in range(m + 2, len(q))])
    pt = PoissonPoint(lam, m, beta, exp_f, exp_fy, exp_f / -math.expm1(-lam))
    pt.check()
    return pt


def _cdf(lam: float, i: int) -> float:
    return math.fsum(pmf(lam, i)[: i + 1])


def lambda_boundaries(i_max: int) -> list[float]:
    """``lam_1 < ... < lam_{i_max}`` where ``lam_{i+1}`` solves ``P(Y <= i) = 1/2``."""
    if i_max < 1:
        raise ValueError("i_max must be >= 1")
    out = [math.log(2.0)]
    for i in range(1, i_max):
        # P(Y <= i) falls from 1 to 0 as lam grows; the root lies in (i, i + 1)
        out.append(bisect(lambda x: _cdf(x, i) - 0.5, float(i), float(i + 1), xtol=1e-13, rtol=1e-15, maxiter=200))
    return out


class RatioCurve(NamedTuple):
    lam: np.ndarray
    m: np.ndarray
    beta: np.ndarray
    exp_f: np.ndarray
    exp_fy: np.ndarray
    ratio: np.ndarray


def ratio_curve(lams) -> RatioCurve:
    """Vectorized ``evaluate_point`` over an array of means (log-space pmf)."""
    lam = np.asarray(lams, dtype=np.float64).reshape(-1)
    if lam.size == 0 or np.any(lam <= 0):
        raise ValueError("means must be positive")
    top = float(lam.max())
    kmax = int(math.ceil(top + 12.0 * math.sqrt(top) + 40.0))
    k = np.arange(kmax + 1, dtype=np.float64)
    logq = k[None, :] * np.log(lam)[:, None] - lam[:, None] - gammaln(k + 1.0)[None, :]
    q = np.exp(logq)
    cdf = np.cumsum(q, axis=1)
    m = np.argmax(cdf >= 0.5, axis=1)
    rows = np.arange(lam.size)
    qm = q[rows, m]
    if np.any(q[:, -1] >= _TAIL * qm):
        raise ArithmeticError("pmf table too short")
    below = np.where(m > 0, cdf[rows, np.maximum(m - 1, 0)], 0.0)
    beta = np.minimum((0.5 - below) / qm, 1.0)
    q1 = q[rows, m + 1]
    exp_f = 1.0 - cdf[rows, m] - beta * q1
    upper = k[None, :] >= (m + 2)[:, None]
    exp_fy = (1.0 - beta) * (m + 1) * q1 + np.sum(np.where(upper, k[None, :] * q, 0.0), axis=1)
    return RatioCurve(lam, m, beta, exp_f, exp_fy, exp_f / -np.expm1(-lam))


class RatioMinimum(NamedTuple):
    lam: float
    ratio: float


def minimize_ratio(grid_points: int = 100_000) -> RatioMinimum:
    """Global minimizer of ``E[F*] / P(Y != 0)``.

    The candidates are the median boundaries ``lam_1..lam_4``; beyond
    ``lam_4`` the ratio stays above 0.304. A dense grid on ``(0, lam_4]``
    guards the candidate argument.
    """
    cands = lambda_boundaries(4)
    best = min((evaluate_point(x).ratio, x) for x in cands)
    grid = np.linspace(cands[-1] / grid_points, cands[-1], grid_points)
    curve = ratio_curve(grid)
    j = int(np.argmin(curve.ratio))
    if curve.ratio[j] < best[0]:
        best = (float(curve.ratio[j]), float(grid[j]))
    return RatioMinimum(best[1], best[0])


def feasible_perturbations(lam: float, count: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Random ``f_k = E[F | Y = k]`` profiles with ``E[F Y] >= lam / 2``.

    Each starts from ``F*`` plus noise and is pushed towards 1 just enough to
    meet the constraint.
    """
    pt = evaluate_point(lam)
    q = np.asarray(pmf(lam, pt.m + 2))
    k = np.arange(q.size)
    base = np.where(k <= pt.m, 0.0, 1.0)
    base[pt.m + 1] = 1.0 - pt.beta
    out = []
    for _ in range(count):
        f = np.clip(base + rng.normal(0.0, 0.3, q.size) * rng.random(), 0.0, 1.0)
        have = float(np.dot(k * q, f))
        if have < lam / 2:
            room = float(np.dot(k * q, 1.0 - f))
            t = min(1.0, (lam / 2 - have) / room * (1 + 1e-9))
            f = f + t * (1.0 - f)
        out.append(f)
    return out


def threshold_bound_check(lam: float, candidates) -> bool:
    """Check ``E[F] >= P(Y != 0) / 3.44`` and ``E[F] >= E[F*]`` for profiles ``f_k``.

    Raises:
        ValueError: a profile leaves [0, 1] or violates ``E[F Y] >= lam / 2``.
    """
    pt = evaluate_point(lam)
    ok = True
    for f in candidates:
        f = np.asarray(f, dtype=np.float64)
        if np.any(f < 0) or np.any(f > 1):
            raise ValueError("profile values must lie in [0, 1]")
        q = np.asarray(pmf(lam, f.size - 1))
        fk = np.ones(q.size)  # the tail past the profile counts as F = 1
        fk[: f.size] = f
        k = np.arange(q.size)
        if math.fsum(k * q * fk) < lam / 2 - 1e-12:
            raise ValueError("infeasible profile: E[F Y] < lam / 2")
        ef = math.fsum(q * fk)
        ok &= ef >= -math.expm1(-lam) / BOUND and ef >= pt.exp_f - 1e-12
    return bool(ok)
