"""Two-service bundle profit, closed-form maximizers, and the bundle-vs-separate call.

Gross profit of a bundle sold at fee p with per-service privacy levels
(r1, r2), demand factor sigma = 0.5 for complements and 0.5 + gamma^2 for
substitutes (linear demand form):

    G(r1, r2, p) = m*p*(1 - sigma*p^2/((1+gamma)^2*u1*u2))
                   - n*c1*(1 - r1) - n*c2*(1 - r2)

Stationarity reduces to one quadratic in the fee,

    (m*p*alpha3 + 3*n*c1) * (m*p*beta3 + 3*n*c2)
        = (1+gamma)^2 * m^2 * alpha1*beta1*alpha3*beta3 / (3*sigma),

whose positive root gives p*; the privacy levels follow from
X = alpha2*exp(alpha3*r1) = 3*n*c1*alpha1/(m*p*alpha3 + 3*n*c1) and the
symmetric expression for r2.  For complements this is evaluated directly;
for substitutes the tabulated closed-form candidate is sign-inconsistent
(its fee is negative on the whole valid domain), so the optimizer records
it and falls back to grid-seeded coordinate ascent, which is exact here
because G is concave in each coordinate wherever u1, u2 > 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .demand import (
    EXACT_GEOMETRY,
    PAPER_FORM,
    MarketSpec,
    prob_buy_complement,
    prob_buy_substitute,
)
from .errors import DomainError
from .hessians import ConcavityReport, alternating_minor_verdict
from .quality import evaluate_quality
from .separate import (
    OptimumSeparate,
    SeparateScenario,
    ServiceSpec,
    optimize_separate,
    privacy_cap,
)

__all__ = [
    "COMPLEMENT",
    "SUBSTITUTE",
    "BundleSpec",
    "OptimumBundle",
    "BundlingDecision",
    "gross_profit_bundle",
    "optimize_bundle",
    "optimal_bundle_fee_fixed_privacy",
    "concavity_report_bundle",
    "bundling_decision",
]

COMPLEMENT = "complement"
SUBSTITUTE = "substitute"

_ASCENT_TOL = 1e-13
_ASCENT_SWEEPS = 600
_GOLD = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class BundleSpec:
    """Two services sold as one package at a single fee.

    Both services face the same customer pool and the same crowd size;
    mismatched participant counts are rejected up front.
    """

    s1: ServiceSpec
    s2: ServiceSpec
    market: MarketSpec
    gamma: float
    kind: str

    def __post_init__(self):
        if self.kind not in (COMPLEMENT, SUBSTITUTE):
            raise DomainError(f"bundle kind must be '{COMPLEMENT}' or '{SUBSTITUTE}', got {self.kind!r}")
        if not math.isfinite(self.gamma):
            raise DomainError(f"contingency must be finite, got {self.gamma}")
        if self.kind == COMPLEMENT and self.gamma < 0:
            raise DomainError(f"complement bundles need contingency >= 0, got {self.gamma}")
        if self.kind == SUBSTITUTE and not (-0.5 < self.gamma < 0):
            raise DomainError(f"substitute bundles need contingency in (-0.5, 0), got {self.gamma}")
        if self.s1.n != self.s2.n:
            raise DomainError(
                f"bundled services must share one crowd size, got {self.s1.n} and {self.s2.n}"
            )

    @property
    def n(self) -> int:
        return self.s1.n

    @property
    def demand_factor(self) -> float:
        """sigma in the linear demand form: 0.5 +- the substitute correction."""
        return 0.5 if self.kind == COMPLEMENT else 0.5 + self.gamma**2


@dataclass(frozen=True)
class OptimumBundle:
    r1_star: float
    r2_star: float
    p_b_star: float
    profit: float
    interior: bool
    clamped_variables: tuple[str, ...]
    fee_root: float
    demand_mode: str
    fallback: bool
    oracle_delta: float | None = None


@dataclass(frozen=True)
class BundlingDecision:
    bundle_profit: float
    separate_profits: tuple[float, float]
    recommend_bundle: bool
    bundle_optimum: OptimumBundle
    separate_optima: tuple[OptimumSeparate, OptimumSeparate]


def _buy_probability(bundle: BundleSpec, p_b, u1, u2, demand_mode):
    if bundle.kind == COMPLEMENT:
        return prob_buy_complement(p_b, u1, u2, bundle.gamma, demand_mode)
    return prob_buy_substitute(p_b, u1, u2, bundle.gamma, demand_mode)


def gross_profit_bundle(bundle: BundleSpec, r1, r2, p_b, demand_mode=PAPER_FORM):
    """Bundle revenue minus both services' data costs; arrays OK in paper mode."""
    r1_arr = np.asarray(r1, dtype=float)
    r2_arr = np.asarray(r2, dtype=float)
    p_arr = np.asarray(p_b, dtype=float)
    if np.any(r1_arr < 0) or np.any(r1_arr > 1) or np.any(r2_arr < 0) or np.any(r2_arr > 1):
        raise DomainError("privacy levels must lie in [0, 1]")
    if np.any(p_arr < 0):
        raise DomainError("bundle fee must be nonnegative")
    u1 = evaluate_quality(r1_arr, bundle.s1.quality)
    u2 = evaluate_quality(r2_arr, bundle.s2.quality)
    prob = _buy_probability(bundle, p_arr, u1, u2, demand_mode)
    n = bundle.n
    out = (
        bundle.market.m * p_arr * prob
        - n * bundle.s1.c * (1.0 - r1_arr)
        - n * bundle.s2.c * (1.0 - r2_arr)
    )
    return float(out) if np.ndim(out) == 0 else out


def _fee_root(bundle: BundleSpec, sigma: float) -> float:
    """Positive root of the stationarity quadratic, scaled by 2*m*a3*b3."""
    a = bundle.s1.quality
    b = bundle.s2.quality
    m, n = bundle.market.m, bundle.n
    c1, c2 = bundle.s1.c, bundle.s2.c
    k = (1.0 + bundle.gamma) ** 2
    radical = math.sqrt(
        (4.0 / 3.0) * k * m * m * a.alpha1 * b.alpha1 * a.alpha3**2 * b.alpha3**2 / sigma
        + 9.0 * n * n * (a.alpha3 * c2 - b.alpha3 * c1) ** 2
    )
    return radical - 3.0 * n * a.alpha3 * c2 - 3.0 * n * b.alpha3 * c1


def _complement_candidate(bundle: BundleSpec):
    """Closed-form stationary point for complements; returns (r1, r2, p, root)."""
    a = bundle.s1.quality
    b = bundle.s2.quality
    m, n = bundle.market.m, bundle.n
    c1, c2 = bundle.s1.c, bundle.s2.c
    k = (1.0 + bundle.gamma) ** 2
    root = _fee_root(bundle, 0.5)
    p = 0.5 * root / (m * a.alpha3 * b.alpha3)
    arg1 = (
        13.5 * n * n * c1 * c2 / (m * m * a.alpha2 * a.alpha3 * b.alpha1 * b.alpha3 * k)
        + 2.25 * n * c1 * root / (m * m * a.alpha2 * a.alpha3**2 * b.alpha1 * b.alpha3 * k)
    )
    arg2 = (
        13.5 * n * n * c1 * c2 / (m * m * a.alpha1 * a.alpha3 * b.alpha2 * b.alpha3 * k)
        + 2.25 * n * c2 * root / (m * m * a.alpha1 * a.alpha3 * b.alpha2 * b.alpha3**2 * k)
    )
    r1 = math.log(arg1) / a.alpha3 if arg1 > 0 else -math.inf
    r2 = math.log(arg2) / b.alpha3 if arg2 > 0 else -math.inf
    return r1, r2, p, root


def _substitute_candidate(bundle: BundleSpec):
    """Tabulated closed-form candidate for substitutes, kept for diagnostics.

    The tabulated fee root carries an overall sign that makes the fee
    negative on the whole valid domain, so the candidate never passes
    validation; optimize_bundle certifies the optimum through the
    coordinate-ascent path instead.
    """
    a = bundle.s1.quality
    b = bundle.s2.quality
    m, n = bundle.market.m, bundle.n
    c1, c2 = bundle.s1.c, bundle.s2.c
    g = bundle.gamma
    g2 = g * g
    k = g2 + 2.0 * g + 1.0
    q = a.alpha1 * b.alpha1 * m * m * a.alpha3**2 * b.alpha3**2
    bracket = (
        8.0 * q * g2
        + 16.0 * q * g
        + 8.0 * q
        + 27.0 * n * n * a.alpha3**2 * c2 * c2 * (g2 + 1.0)
        - 54.0 * n * n * a.alpha3 * c1 * c2 * b.alpha3 * (g2 + 1.0)
        + 27.0 * n * n * c1 * c1 * b.alpha3**2 * (g2 + 1.0)
    )
    root = math.sqrt(bracket) / (9.0 * (g2 + 1.0) ** 2)
    p = -0.5 * root / (m * a.alpha3 * b.alpha3)
    arg1 = (
        13.5 * (c1 * c2 * n * n * g2 + c1 * c2 * n * n)
        / (m * m * a.alpha2 * a.alpha3 * b.alpha1 * b.alpha3 * k)
        - 2.25 * (n * c1 * g2 + n * c1) * root
        / (m * m * a.alpha2 * a.alpha3**2 * b.alpha1 * b.alpha3 * k)
    )
    arg2 = (
        13.5 * n * c2 * (n * c1 * g2 + n * c1)
        / (m * m * a.alpha1 * a.alpha3 * b.alpha2 * b.alpha3 * k)
        - 2.25 * n * c2 * (g2 + 1.0) * root
        / (m * m * a.alpha1 * a.alpha3 * b.alpha2 * b.alpha3**2 * k)
    )
    r1 = math.log(arg1) / a.alpha3 if arg1 > 0 else -math.inf
    r2 = math.log(arg2) / b.alpha3 if arg2 > 0 else -math.inf
    return r1, r2, p, root


def _fee_upper_bound(bundle: BundleSpec, demand_mode: str) -> float:
    u1_0 = evaluate_quality(0.0, bundle.s1.quality)
    u2_0 = evaluate_quality(0.0, bundle.s2.quality)
    if demand_mode == PAPER_FORM:
        return (1.0 + bundle.gamma) * math.sqrt(u1_0 * u2_0 / bundle.demand_factor)
    return (1.0 + bundle.gamma) * (u1_0 + u2_0)


def _privacy_update(quality, cost, kappa, cap):
    """Maximize the r-slice: smaller root of n*c*(a1-X)^2 = kappa*X in X.

    Returns (r, clamped).  kappa bundles the fee/demand prefactor; cost is
    n*c for the service being updated.
    """
    if kappa <= 0.0:
        # revenue insensitive to this privacy level: cost alone decides
        return (cap, True) if cost > 0 else (0.0, True)
    if cost == 0.0:
        return 0.0, True
    a1 = quality.alpha1
    b_term = 2.0 * cost * a1 + kappa
    x = 2.0 * cost * a1 * a1 / (b_term + math.sqrt(kappa * kappa + 4.0 * cost * a1 * kappa))
    r = math.log(x / quality.alpha2) / quality.alpha3
    if r < 0.0:
        return 0.0, True
    if r > cap:
        return cap, True
    return r, False


def _golden_max(fn, lo, hi, tol=1e-12):
    a, b = lo, hi
    c = b - _GOLD * (b - a)
    d = a + _GOLD * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc < fd:
            a, c, fc = c, d, fd
            d = a + _GOLD * (b - a)
            fd = fn(d)
        else:
            b, d, fd = d, c, fc
            c = b - _GOLD * (b - a)
            fc = fn(c)
    return 0.5 * (a + b)


def _coordinate_ascent(bundle: BundleSpec, demand_mode: str, start):
    """Cyclic exact maximization over p, r1, r2 from a grid seed.

    In paper mode each coordinate maximizer is closed form; in exact mode
    golden-section search runs on the clipped-geometry profit.  Concavity
    of every slice makes the sweep converge to the joint optimum.
    """
    a, b = bundle.s1.quality, bundle.s2.quality
    m, n = bundle.market.m, bundle.n
    sigma = bundle.demand_factor
    k = (1.0 + bundle.gamma) ** 2
    cap1, cap2 = privacy_cap(a), privacy_cap(b)
    p_hi = _fee_upper_bound(bundle, demand_mode)
    r1, r2, p = start
    clamp1 = clamp2 = False
    # near the optimum the profit is flat to float resolution over a
    # ~1e-6-wide plateau, so golden-section coordinates cannot be pinned
    # tighter than that; the paper mode uses exact updates instead
    paper = demand_mode == PAPER_FORM
    sweep_tol = _ASCENT_TOL if paper else 1e-6
    golden_tol = 1e-9
    edge = 1e-9 if paper else 1e-5
    for _ in range(_ASCENT_SWEEPS):
        prev = (r1, r2, p)
        u1 = evaluate_quality(r1, a)
        u2 = evaluate_quality(r2, b)
        if paper:
            p = math.sqrt(k * u1 * u2 / (3.0 * sigma))
            kappa1 = sigma * m * p**3 * a.alpha3 / (k * u2)
            r1, clamp1 = _privacy_update(a, n * bundle.s1.c, kappa1, cap1)
            u1 = evaluate_quality(r1, a)
            kappa2 = sigma * m * p**3 * b.alpha3 / (k * u1)
            r2, clamp2 = _privacy_update(b, n * bundle.s2.c, kappa2, cap2)
        else:
            p = _golden_max(
                lambda t: gross_profit_bundle(bundle, r1, r2, t, demand_mode), 0.0, p_hi, golden_tol
            )
            r1 = _golden_max(
                lambda t: gross_profit_bundle(bundle, t, r2, p, demand_mode), 0.0, cap1, golden_tol
            )
            r2 = _golden_max(
                lambda t: gross_profit_bundle(bundle, r1, t, p, demand_mode), 0.0, cap2, golden_tol
            )
            clamp1 = r1 <= edge or r1 >= cap1 - edge
            clamp2 = r2 <= edge or r2 >= cap2 - edge
        if max(abs(r1 - prev[0]), abs(r2 - prev[1]), abs(p - prev[2])) < sweep_tol:
            break
    clamped = []
    if clamp1:
        clamped.append("r1")
    if clamp2:
        clamped.append("r2")
    if p <= 0.0:
        clamped.append("p_b")
    return r1, r2, p, tuple(clamped)


def optimize_bundle(
    bundle: BundleSpec,
    demand_mode: str = PAPER_FORM,
    verify: bool = False,
    seed_points: int = 48,
    verify_points: int = 120,
) -> OptimumBundle:
    """Maximize the bundle profit over (r1, r2, p_b).

    The kind-matching closed-form candidate is evaluated first and
    accepted when it is feasible (nonnegative fee, privacy levels inside
    their boxes).  Infeasible or distrusted candidates trigger the
    fallback: a dense-grid seed refined by coordinate ascent.  With
    ``verify`` the result is certified against an independent grid
    maximization and re-solved through the fallback if it loses to the
    grid by more than rounding.
    """
    from . import oracles  # runtime import: oracles builds on this module

    cap1, cap2 = privacy_cap(bundle.s1.quality), privacy_cap(bundle.s2.quality)
    if bundle.kind == COMPLEMENT:
        c_r1, c_r2, c_p, root = _complement_candidate(bundle)
    else:
        c_r1, c_r2, c_p, root = _substitute_candidate(bundle)
    candidate_ok = (
        demand_mode == PAPER_FORM
        and math.isfinite(c_r1)
        and math.isfinite(c_r2)
        and math.isfinite(c_p)
        and 0.0 <= c_r1 <= cap1
        and 0.0 <= c_r2 <= cap2
        and c_p >= 0.0
    )
    fallback = not candidate_ok
    oracle_delta = None
    if candidate_ok:
        r1, r2, p = c_r1, c_r2, c_p
        clamped: tuple[str, ...] = ()
        if verify:
            grid_best = oracles.grid_maximize(
                oracles.bundle_objective(bundle, demand_mode),
                oracles.bundle_grid(bundle, points=verify_points, demand_mode=demand_mode),
            )
            profit = gross_profit_bundle(bundle, r1, r2, p, demand_mode)
            oracle_delta = profit - grid_best.value
            if oracle_delta < -1e-7 * (1.0 + abs(grid_best.value)):
                fallback = True
    if fallback:
        seed = oracles.grid_maximize(
            oracles.bundle_objective(bundle, demand_mode),
            oracles.bundle_grid(bundle, points=seed_points, demand_mode=demand_mode),
        )
        r1, r2, p, clamped = _coordinate_ascent(bundle, demand_mode, seed.coords)
        if verify:
            grid_best = oracles.grid_maximize(
                oracles.bundle_objective(bundle, demand_mode),
                oracles.bundle_grid(bundle, points=verify_points, demand_mode=demand_mode),
            )
            oracle_delta = gross_profit_bundle(bundle, r1, r2, p, demand_mode) - grid_best.value
    profit = gross_profit_bundle(bundle, r1, r2, p, demand_mode)
    return OptimumBundle(
        r1_star=r1,
        r2_star=r2,
        p_b_star=p,
        profit=profit,
        interior=not clamped,
        clamped_variables=clamped,
        fee_root=root,
        demand_mode=demand_mode,
        fallback=fallback,
        oracle_delta=oracle_delta,
    )


def optimal_bundle_fee_fixed_privacy(bundle: BundleSpec, r1: float, r2: float) -> float:
    """Fee rule 0.82*(1+gamma)*sqrt(u1*u2) for complements with imposed privacy.

    The 0.82 coefficient is the conventional two-decimal rounding of
    sqrt(2/3), the exact maximizer of p*(1 - 0.5*p^2/((1+gamma)^2*u1*u2)).
    No substitute analogue is defined.
    """
    if bundle.kind != COMPLEMENT:
        raise DomainError("fixed-privacy bundle fee is defined for complement bundles only")
    u1 = evaluate_quality(r1, bundle.s1.quality)
    u2 = evaluate_quality(r2, bundle.s2.quality)
    if u1 <= 0 or u2 <= 0:
        raise DomainError("both qualities must be positive at the fixed privacy levels")
    return 0.82 * (1.0 + bundle.gamma) * math.sqrt(u1 * u2)


def concavity_report_bundle(bundle: BundleSpec, r1: float, r2: float, p_b: float) -> ConcavityReport:
    """Analytic Hessian of the complement profit in (r1, r2, p_b) order."""
    if bundle.kind != COMPLEMENT:
        raise DomainError("the bundle concavity report covers complement bundles only")
    a, b = bundle.s1.quality, bundle.s2.quality
    m = bundle.market.m
    u1 = evaluate_quality(r1, a)
    u2 = evaluate_quality(r2, b)
    if u1 <= 0 or u2 <= 0:
        raise DomainError("both qualities must be positive at the evaluation point")
    if p_b < 0:
        raise DomainError("bundle fee must be nonnegative")
    k = (1.0 + bundle.gamma) ** 2
    x = a.alpha2 * math.exp(a.alpha3 * r1)
    y = b.alpha2 * math.exp(b.alpha3 * r2)
    h00 = -0.5 * m * a.alpha3**2 * x * (a.alpha1 + x) * p_b**3 / (k * u1**3 * u2)
    h01 = -0.5 * m * a.alpha3 * b.alpha3 * x * y * p_b**3 / (k * u1**2 * u2**2)
    h02 = -1.5 * m * a.alpha3 * x * p_b**2 / (k * u1**2 * u2)
    h11 = -0.5 * m * b.alpha3**2 * y * (b.alpha1 + y) * p_b**3 / (k * u1 * u2**3)
    h12 = -1.5 * m * b.alpha3 * y * p_b**2 / (k * u1 * u2**2)
    h22 = -3.0 * m * p_b / (k * u1 * u2)
    hessian = np.array([[h00, h01, h02], [h01, h11, h12], [h02, h12, h22]])
    d1 = h00
    d2 = (
        0.25 * m**2 * a.alpha3**2 * b.alpha3**2 * x * y * p_b**6
        * (a.alpha1 * b.alpha1 + x * b.alpha1 + a.alpha1 * y)
        / (k**2 * u1**4 * u2**4)
    )
    a2_cubic = (
        m**3 * p_b**7 * a.alpha3**2 * b.alpha3**2 * x * y
        * (a.alpha1 * y + x * b.alpha1 - 2.0 * a.alpha1 * b.alpha1)
    )
    d3 = 0.375 * a2_cubic / (k**3 * u1**5 * u2**5)
    minors = (d1, d2, d3)
    return ConcavityReport(
        hessian=hessian,
        minors=minors,
        negative_semidefinite=alternating_minor_verdict(minors),
        variables=("r1", "r2", "p_b"),
        a2=a2_cubic,
    )


def bundling_decision(bundle: BundleSpec, demand_mode: str = PAPER_FORM) -> BundlingDecision:
    """Compare the bundle optimum against the pair of standalone optima.

    Recommends bundling only on a strict profit improvement; ties keep the
    services separate.
    """
    opt_b = optimize_bundle(bundle, demand_mode=demand_mode)
    opt_1 = optimize_separate(SeparateScenario(service=bundle.s1, market=bundle.market))
    opt_2 = optimize_separate(SeparateScenario(service=bundle.s2, market=bundle.market))
    separate_total = opt_1.profit + opt_2.profit
    return BundlingDecision(
        bundle_profit=opt_b.profit,
        separate_profits=(opt_1.profit, opt_2.profit),
        recommend_bundle=opt_b.profit > separate_total,
        bundle_optimum=opt_b,
        separate_optima=(opt_1, opt_2),
    )
