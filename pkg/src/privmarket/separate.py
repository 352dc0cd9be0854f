"""Standalone-sale profit and its closed-form maximizer.

Gross profit of one service sold alone at privacy level r and fee p:

    F(r, p) = m*p*(1 - p/u(r)) - n*c*(1 - r)

The stationary point has the closed form

    p* = (m*alpha1*alpha3 - 4*n*c) / (2*m*alpha3)
    r* = log(4*n*c / (m*alpha2*alpha3)) / alpha3

F is concave on u > 0 (minors D1 = -2m/u <= 0, D2 >= 0), so the interior
stationary point is the global optimum; otherwise the maximizer sits on
the boundary of the feasible box and the fixed-privacy fee rule u(r)/2
re-optimizes the remaining variable.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .demand import MarketSpec, prob_buy_separate
from .errors import DomainError
from .hessians import ConcavityReport, alternating_minor_verdict
from .quality import QualityParams, evaluate_quality, max_privacy

__all__ = [
    "ServiceSpec",
    "SeparateScenario",
    "OptimumSeparate",
    "privacy_cap",
    "gross_profit_separate",
    "optimize_separate",
    "optimal_fee_fixed_privacy",
    "concavity_report_separate",
]

# privacy stays a probability, and u must stay positive on the search box
_CAP_MARGIN = 1e-9


@dataclass(frozen=True)
class ServiceSpec:
    """One service: quality curve, crowd size n, per-participant wage c."""

    quality: QualityParams
    n: int
    c: float

    def __post_init__(self):
        if not (isinstance(self.n, int) and self.n >= 1):
            raise DomainError(f"participant count must be a positive integer, got {self.n!r}")
        if not (math.isfinite(self.c) and self.c >= 0):
            raise DomainError(f"reservation wage must be finite and >= 0, got {self.c}")


@dataclass(frozen=True)
class SeparateScenario:
    service: ServiceSpec
    market: MarketSpec


@dataclass(frozen=True)
class OptimumSeparate:
    r_star: float
    p_star: float
    profit: float
    interior: bool
    clamped_variables: tuple[str, ...]
    concave_at_optimum: bool
    negative_profit: bool


def privacy_cap(params: QualityParams) -> float:
    """Upper end of the feasible privacy interval: min(1, zero-quality point)."""
    return min(1.0, max_privacy(params) - _CAP_MARGIN)


def gross_profit_separate(scenario: SeparateScenario, r, p_s):
    """Subscription revenue minus realized data cost; accepts arrays."""
    r_arr = np.asarray(r, dtype=float)
    p_arr = np.asarray(p_s, dtype=float)
    if np.any(r_arr < 0) or np.any(r_arr > 1):
        raise DomainError("privacy level must lie in [0, 1]")
    if np.any(p_arr < 0):
        raise DomainError("fee must be nonnegative")
    u = evaluate_quality(r_arr, scenario.service.quality)
    if np.any(np.asarray(u) <= 0):
        raise DomainError("quality must be positive over the evaluated points")
    svc = scenario.service
    out = scenario.market.m * p_arr * prob_buy_separate(p_arr, u) - svc.n * svc.c * (1.0 - r_arr)
    return float(out) if out.ndim == 0 else out


def optimal_fee_fixed_privacy(scenario: SeparateScenario, r: float) -> float:
    """Profit-maximizing fee when the privacy level is imposed: u(r)/2."""
    u = evaluate_quality(r, scenario.service.quality)
    if u <= 0:
        raise DomainError(f"quality is not positive at r={r}")
    return u / 2.0


def optimize_separate(scenario: SeparateScenario) -> OptimumSeparate:
    """Closed-form maximizer with boundary projection.

    The raw stationary point is used when it is feasible (0 <= r* <= cap,
    fee nonnegative).  Otherwise r is clamped to the violated bound and
    the fee re-optimized by the fixed-privacy rule, which is exact because
    the profit restricted to a fixed r is concave in the fee.
    """
    q = scenario.service.quality
    m, n, c = scenario.market.m, scenario.service.n, scenario.service.c
    cap = privacy_cap(q)
    log_arg = 4.0 * n * c / (m * q.alpha2 * q.alpha3)
    r_raw = math.log(log_arg) / q.alpha3 if log_arg > 0 else -math.inf
    if 0.0 <= r_raw <= cap:
        r_star = r_raw
        p_star = (m * q.alpha1 * q.alpha3 - 4.0 * n * c) / (2.0 * m * q.alpha3)
        interior = True
        clamped: tuple[str, ...] = ()
    else:
        # profit after optimizing the fee is concave in r, so the clamp
        # direction is the nearest bound; smaller r wins ties
        r_star = 0.0 if r_raw < 0 else cap
        p_star = max(optimal_fee_fixed_privacy(scenario, r_star), 0.0)
        interior = False
        clamped = ("r",)
    profit = gross_profit_separate(scenario, r_star, p_star)
    report = concavity_report_separate(scenario, r_star, p_star)
    return OptimumSeparate(
        r_star=r_star,
        p_star=p_star,
        profit=profit,
        interior=interior,
        clamped_variables=clamped,
        concave_at_optimum=report.negative_semidefinite,
        negative_profit=profit < 0,
    )


def concavity_report_separate(scenario: SeparateScenario, r: float, p_s: float) -> ConcavityReport:
    """Analytic Hessian of F in (fee, privacy) order with its minors."""
    q = scenario.service.quality
    m = scenario.market.m
    u = evaluate_quality(r, q)
    if u <= 0:
        raise DomainError(f"quality is not positive at r={r}")
    e = math.exp(q.alpha3 * r)
    h_pp = -2.0 * m / u
    h_pr = -2.0 * m * q.alpha2 * q.alpha3 * p_s * e / u**2
    h_rr = (
        -2.0 * m * q.alpha2**2 * q.alpha3**2 * p_s**2 * e**2 / u**3
        - m * q.alpha2 * q.alpha3**2 * p_s**2 * e / u**2
    )
    hessian = np.array([[h_pp, h_pr], [h_pr, h_rr]])
    d1 = h_pp
    d2 = 2.0 * m**2 * q.alpha2 * q.alpha3**2 * p_s**2 * e / u**3
    minors = (d1, d2)
    return ConcavityReport(
        hessian=hessian,
        minors=minors,
        negative_semidefinite=alternating_minor_verdict(minors),
        variables=("p_s", "r"),
    )
