"""Customer demand under uniform reservation prices.

Reservation prices are Uniform[0, 1] per service.  A standalone service at
fee p and quality u is bought iff theta >= p/u.  A two-service bundle at
fee p_b is bought iff the reservation pair lies in the buy region:

  complements (gamma >= 0):  (1+gamma)(theta1*u1 + theta2*u2) > p_b
  substitutes (gamma < 0):   the same half-plane, plus the two corner
                             strips theta1 >= p_b/u1 and theta2 >= p_b/u2

Each closed-form probability comes in two flavours: the published linear
"paper" form and an "exact" mode that clips the buy region against the
unit square and measures the polygon area.  The two agree on interior
geometry and diverge once the fee pushes the boundary outside the square
(and, for substitutes, by a (0.5+gamma^2) vs (0.5-gamma^2) factor; both
are kept on purpose, see prob_buy_substitute).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "PAPER_FORM",
    "EXACT_GEOMETRY",
    "MarketSpec",
    "ContingencyInput",
    "prob_buy_separate",
    "prob_buy_complement",
    "prob_buy_substitute",
    "degree_of_contingency",
]

PAPER_FORM = "paper"
EXACT_GEOMETRY = "exact"
_MODES = (PAPER_FORM, EXACT_GEOMETRY)

_UNIT_SQUARE = ((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0))


@dataclass(frozen=True)
class MarketSpec:
    """Customer side of the market: m customers, Uniform[0,1] reservation prices."""

    m: int

    def __post_init__(self):
        if not (isinstance(self.m, int) and self.m >= 1):
            raise DomainError(f"customer count must be a positive integer, got {self.m!r}")


@dataclass(frozen=True)
class ContingencyInput:
    """Reservation prices of a bundle and of its two standalone services."""

    theta_b: float
    theta_1: float
    theta_2: float

    def __post_init__(self):
        for name in ("theta_b", "theta_1", "theta_2"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise DomainError(f"{name} must be finite and nonnegative, got {v}")


def degree_of_contingency(inp: ContingencyInput) -> float:
    """Relative bundle premium: (theta_b - theta_1 - theta_2)/(theta_1 + theta_2).

    Nonnegative values classify the services as complements, negative as
    substitutes.
    """
    denom = inp.theta_1 + inp.theta_2
    if denom <= 0:
        raise DomainError("theta_1 + theta_2 must be positive")
    return (inp.theta_b - denom) / denom


def _check_mode(mode):
    if mode not in _MODES:
        raise DomainError(f"demand mode must be one of {_MODES}, got {mode!r}")


def _check_positive_quality(*qualities):
    for u in qualities:
        if np.any(np.asarray(u) <= 0) or not np.all(np.isfinite(np.asarray(u))):
            raise DomainError(f"service quality must be positive and finite, got {u}")


def _check_fee(fee):
    if np.any(np.asarray(fee) < 0) or not np.all(np.isfinite(np.asarray(fee))):
        raise DomainError(f"fee must be nonnegative and finite, got {fee}")


def prob_buy_separate(fee, quality):
    """P(theta >= fee/quality) under Uniform[0,1], clamped to [0, 1]."""
    _check_fee(fee)
    _check_positive_quality(quality)
    out = np.clip(1.0 - np.asarray(fee, dtype=float) / quality, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def _clip_halfplane(poly, a, b, c):
    """Sutherland-Hodgman step: keep the region a*x + b*y <= c."""
    out = []
    n = len(poly)
    for i in range(n):
        px, py = poly[i]
        qx, qy = poly[(i + 1) % n]
        p_in = a * px + b * py <= c
        q_in = a * qx + b * qy <= c
        if p_in:
            out.append((px, py))
        if p_in != q_in:
            denom = a * (qx - px) + b * (qy - py)
            t = (c - a * px - b * py) / denom
            out.append((px + t * (qx - px), py + t * (qy - py)))
    return out


def _polygon_area(poly):
    if len(poly) < 3:
        return 0.0
    area = 0.0
    n = len(poly)
    for i in range(n):
        x0, y0 = poly[i]
        x1, y1 = poly[(i + 1) % n]
        area += x0 * y1 - x1 * y0
    return abs(area) / 2.0


def _nonbuy_area_line(fee, u1, u2, gamma):
    """Area of [0,1]^2 below the line (1+gamma)(t1*u1 + t2*u2) = fee."""
    q = fee / (1.0 + gamma)
    poly = _clip_halfplane(_UNIT_SQUARE, u1, u2, q)
    return _polygon_area(poly)


def _line_only_buy_probability(fee, u1, u2, gamma):
    """Exact buy probability when only the bundle line grants a purchase.

    Valid for any gamma > -1; used directly by the complement mode and as
    the comparison baseline for the substitute-superset property.
    """
    return min(max(1.0 - _nonbuy_area_line(fee, u1, u2, gamma), 0.0), 1.0)


def prob_buy_complement(fee, u1, u2, gamma, mode=PAPER_FORM):
    """Bundle buy probability for complementary services.

    paper mode: 1 - 0.5*fee^2/((1+gamma)^2*u1*u2), clamped to [0,1].
    exact mode: one minus the clipped-polygon area below the bundle line.
    Both modes evaluate the identical expression while the non-buy region
    is the interior triangle (fee <= (1+gamma)*min(u1,u2)), so they are
    bit-equal there.
    """
    _check_mode(mode)
    _check_fee(fee)
    _check_positive_quality(u1, u2)
    if np.any(np.asarray(gamma) < 0) or not np.all(np.isfinite(np.asarray(gamma))):
        raise DomainError(f"complement contingency must be >= 0, got {gamma}")
    if mode == PAPER_FORM:
        fee_arr = np.asarray(fee, dtype=float)
        out = np.clip(1.0 - 0.5 * fee_arr**2 / ((1.0 + gamma) ** 2 * u1 * u2), 0.0, 1.0)
        return float(out) if out.ndim == 0 else out
    fee = float(fee)
    if fee <= (1.0 + gamma) * min(u1, u2):
        return float(np.clip(1.0 - 0.5 * fee**2 / ((1.0 + gamma) ** 2 * u1 * u2), 0.0, 1.0))
    return _line_only_buy_probability(fee, u1, u2, gamma)


def prob_buy_substitute(fee, u1, u2, gamma, mode=PAPER_FORM):
    """Bundle buy probability for substitute services, gamma in (-0.5, 0).

    paper mode: 1 - (0.5+gamma^2)*fee^2/((1+gamma)^2*u1*u2), clamped.
    exact mode: one minus the area of the clipped corner region
    {t1 < fee/u1} & {t2 < fee/u2} & below the bundle line.  Independent
    polygon geometry yields a (0.5-gamma^2) factor where the published
    expression carries (0.5+gamma^2); both are preserved so the gap can be
    measured instead of silently resolved.
    """
    _check_mode(mode)
    _check_fee(fee)
    _check_positive_quality(u1, u2)
    g_arr = np.asarray(gamma)
    if np.any(g_arr <= -0.5) or np.any(g_arr >= 0) or not np.all(np.isfinite(g_arr)):
        raise DomainError(
            f"substitute contingency must lie in (-0.5, 0), got {gamma} "
            "(corner geometry breaks outside that window)"
        )
    if mode == PAPER_FORM:
        fee_arr = np.asarray(fee, dtype=float)
        factor = 0.5 + np.asarray(gamma, dtype=float) ** 2
        out = np.clip(1.0 - factor * fee_arr**2 / ((1.0 + gamma) ** 2 * u1 * u2), 0.0, 1.0)
        return float(out) if out.ndim == 0 else out
    fee = float(fee)
    poly = _clip_halfplane(_UNIT_SQUARE, 1.0, 0.0, fee / u1)
    poly = _clip_halfplane(poly, 0.0, 1.0, fee / u2)
    poly = _clip_halfplane(poly, u1, u2, fee / (1.0 + gamma))
    return min(max(1.0 - _polygon_area(poly), 0.0), 1.0)
