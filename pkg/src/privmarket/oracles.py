"""Independent verification: dense grid maximization and Monte-Carlo simulation.

The grid oracle exhaustively evaluates a profit surface on a lattice and
is the cross-check for every closed-form maximizer.  The Monte-Carlo side
replays the market mechanics directly from their defining inequalities
(reservation-price draws, participant true/noisy coin flips) rather than
from any derived probability formula, so agreement is meaningful.

Randomness uses counter-based Philox streams, one per fixed-size chunk of
draws, combined in chunk order.  Any partitioning of chunks over workers
reproduces the same bits, which is what makes seeded results stable.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError

__all__ = [
    "GridSpec",
    "GridMaxResult",
    "grid_maximize",
    "separate_objective",
    "separate_grid",
    "bundle_objective",
    "bundle_grid",
    "SimulationSpec",
    "SimResult",
    "DemandRegion",
    "participant_reports",
    "simulate_market",
    "estimate_buy_probability",
]

_CHUNK = 1 << 17


@dataclass(frozen=True)
class GridSpec:
    """Per-dimension (lo, hi, points) closed ranges of the search lattice."""

    axes: tuple[tuple[float, float, int], ...]

    def __post_init__(self):
        if not self.axes:
            raise DomainError("grid needs at least one axis")
        for lo, hi, count in self.axes:
            if not (math.isfinite(lo) and math.isfinite(hi) and lo <= hi):
                raise DomainError(f"bad grid range [{lo}, {hi}]")
            if count < 2:
                raise DomainError(f"grid axes need at least 2 points, got {count}")


@dataclass(frozen=True)
class GridMaxResult:
    coords: tuple[float, ...]
    value: float
    index: tuple[int, ...]


def grid_maximize(objective: Callable, grid: GridSpec) -> GridMaxResult:
    """Exhaustive lattice maximization with a deterministic tie-break.

    The objective must broadcast over numpy arrays.  Ties resolve to the
    lexicographically smallest index tuple (numpy's first flat argmax in C
    order), so the result does not depend on evaluation order.
    """
    axes = [np.linspace(lo, hi, count) for lo, hi, count in grid.axes]
    mesh = np.meshgrid(*axes, indexing="ij", sparse=True)
    values = np.broadcast_to(
        np.asarray(objective(*mesh), dtype=float), tuple(len(ax) for ax in axes)
    )
    if np.isnan(values).any():
        raise DomainError("objective produced NaN on the grid; domain is not valid")
    flat = int(np.argmax(values))
    index = np.unravel_index(flat, values.shape)
    return GridMaxResult(
        coords=tuple(float(axes[d][i]) for d, i in enumerate(index)),
        value=float(values[index]),
        index=tuple(int(i) for i in index),
    )


def separate_objective(scenario) -> Callable:
    from .separate import gross_profit_separate

    return lambda r, p: gross_profit_separate(scenario, r, p)


def separate_grid(scenario, r_points: int = 400, fee_points: int = 400) -> GridSpec:
    from .separate import privacy_cap

    cap = privacy_cap(scenario.service.quality)
    return GridSpec(axes=((0.0, cap, r_points), (0.0, scenario.service.quality.alpha1, fee_points)))


def bundle_objective(bundle, demand_mode=None) -> Callable:
    from .bundle import gross_profit_bundle
    from .demand import PAPER_FORM

    mode = demand_mode or PAPER_FORM
    if mode == PAPER_FORM:
        return lambda r1, r2, p: gross_profit_bundle(bundle, r1, r2, p, mode)
    scalar = lambda r1, r2, p: gross_profit_bundle(bundle, float(r1), float(r2), float(p), mode)
    return np.vectorize(scalar)


def bundle_grid(bundle, points: int = 120, demand_mode=None) -> GridSpec:
    from .bundle import _fee_upper_bound
    from .demand import PAPER_FORM
    from .separate import privacy_cap

    mode = demand_mode or PAPER_FORM
    cap1 = privacy_cap(bundle.s1.quality)
    cap2 = privacy_cap(bundle.s2.quality)
    p_hi = _fee_upper_bound(bundle, mode)
    return GridSpec(axes=((0.0, cap1, points), (0.0, cap2, points), (0.0, p_hi, points)))


@dataclass(frozen=True)
class SimulationSpec:
    """Monte-Carlo controls: draw count, stream seed, trace noise scale."""

    draws: int
    seed: int = 0
    sigma_z: float = 1.0

    def __post_init__(self):
        if not (isinstance(self.draws, int) and self.draws >= 1):
            raise DomainError(f"draw count must be a positive integer, got {self.draws!r}")
        if not (isinstance(self.seed, int) and 0 <= self.seed < 2**64):
            raise DomainError(f"seed must fit in 64 unsigned bits, got {self.seed!r}")
        if not (math.isfinite(self.sigma_z) and self.sigma_z >= 0):
            raise DomainError(f"sigma_z must be finite and >= 0, got {self.sigma_z}")


@dataclass(frozen=True)
class SimResult:
    mean: float
    std_error: float
    draws: int


@dataclass(frozen=True)
class DemandRegion:
    """Descriptor of one buy region for probability estimation."""

    kind: str  # "separate" | "complement" | "substitute"
    fee: float
    u1: float
    u2: float | None = None
    gamma: float | None = None

    def __post_init__(self):
        if self.kind not in ("separate", "complement", "substitute"):
            raise DomainError(f"unknown region kind {self.kind!r}")
        if self.fee < 0 or self.u1 <= 0:
            raise DomainError("region needs fee >= 0 and positive quality")
        if self.kind != "separate":
            if self.u2 is None or self.gamma is None or self.u2 <= 0:
                raise DomainError(f"{self.kind} region needs u2 > 0 and a contingency")
            if self.kind == "complement" and self.gamma < 0:
                raise DomainError("complement region needs gamma >= 0")
            if self.kind == "substitute" and not (-0.5 < self.gamma < 0):
                raise DomainError("substitute region needs gamma in (-0.5, 0)")


def _chunk_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed).jumped(index))


def _chunks(draws: int):
    start = 0
    index = 0
    while start < draws:
        yield index, min(_CHUNK, draws - start)
        start += _CHUNK
        index += 1


def participant_reports(rng: np.random.Generator, count: int, r: float, sigma_z: float):
    """Emitted data of `count` participants at privacy level r.

    Each participant sends the true value with probability 1 - r and a
    noisy copy (additive Gaussian, scale sigma_z) otherwise.  Returns the
    emitted vector and the boolean true-data mask.
    """
    if not 0.0 <= r <= 1.0:
        raise DomainError(f"privacy level must lie in [0, 1], got {r}")
    true_mask = rng.random(count) >= r
    x = rng.standard_normal(count)
    z = rng.standard_normal(count)
    emitted = np.where(true_mask, x, x + sigma_z * z)
    return emitted, true_mask


def simulate_market(target, point, sim: SimulationSpec) -> SimResult:
    """Monte-Carlo estimate of the expected gross profit at one decision point.

    One draw pairs a customer reservation sample with a participant
    true/noisy flip and contributes m*fee*bought - n*wage*true per
    service; the mean over draws is an unbiased estimate of the analytic
    profit.  Participant reports (including the additive-noise trace) are
    generated per draw even though only the true-data mask enters the
    realized cost.
    """
    from .bundle import BundleSpec, SUBSTITUTE
    from .quality import evaluate_quality
    from .separate import SeparateScenario

    if isinstance(target, SeparateScenario):
        r, p = float(point[0]), float(point[1])
        u = evaluate_quality(r, target.service.quality)
        if not (0.0 <= r <= 1.0) or p < 0 or u <= 0:
            raise DomainError(f"invalid decision point (r={r}, p={p})")
        m, n, c = target.market.m, target.service.n, target.service.c

        def chunk_values(rng, k):
            theta = rng.random(k)
            bought = theta >= p / u
            _, true_mask = participant_reports(rng, k, r, sim.sigma_z)
            return m * p * bought - n * c * true_mask

    elif isinstance(target, BundleSpec):
        r1, r2, p_b = float(point[0]), float(point[1]), float(point[2])
        u1 = evaluate_quality(r1, target.s1.quality)
        u2 = evaluate_quality(r2, target.s2.quality)
        if not (0.0 <= r1 <= 1.0 and 0.0 <= r2 <= 1.0) or p_b < 0 or u1 <= 0 or u2 <= 0:
            raise DomainError(f"invalid decision point (r1={r1}, r2={r2}, p_b={p_b})")
        m, n = target.market.m, target.n
        c1, c2 = target.s1.c, target.s2.c
        gamma = target.gamma
        substitute = target.kind == SUBSTITUTE

        def chunk_values(rng, k):
            theta1 = rng.random(k)
            theta2 = rng.random(k)
            bought = (1.0 + gamma) * (theta1 * u1 + theta2 * u2) > p_b
            if substitute:
                bought |= (theta1 >= p_b / u1) | (theta2 >= p_b / u2)
            _, true1 = participant_reports(rng, k, r1, sim.sigma_z)
            _, true2 = participant_reports(rng, k, r2, sim.sigma_z)
            return m * p_b * bought - n * c1 * true1 - n * c2 * true2

    else:
        raise DomainError(f"cannot simulate target of type {type(target).__name__}")

    total = 0.0
    total_sq = 0.0
    for index, k in _chunks(sim.draws):
        vals = chunk_values(_chunk_rng(sim.seed, index), k)
        total += float(vals.sum())
        total_sq += float((vals * vals).sum())
    mean = total / sim.draws
    if sim.draws > 1:
        var = max(total_sq - sim.draws * mean * mean, 0.0) / (sim.draws - 1)
        std_error = math.sqrt(var / sim.draws)
    else:
        std_error = 0.0
    return SimResult(mean=mean, std_error=std_error, draws=sim.draws)


def estimate_buy_probability(region: DemandRegion, sim: SimulationSpec) -> SimResult:
    """Direct Monte-Carlo estimate of one buy probability from the raw rule."""
    hits = 0
    for index, k in _chunks(sim.draws):
        rng = _chunk_rng(sim.seed, index)
        if region.kind == "separate":
            bought = rng.random(k) >= region.fee / region.u1
        else:
            theta1 = rng.random(k)
            theta2 = rng.random(k)
            bought = (1.0 + region.gamma) * (theta1 * region.u1 + theta2 * region.u2) > region.fee
            if region.kind == "substitute":
                bought |= (theta1 >= region.fee / region.u1) | (theta2 >= region.fee / region.u2)
        hits += int(bought.sum())
    p_hat = hits / sim.draws
    std_error = math.sqrt(p_hat * (1.0 - p_hat) / sim.draws)
    return SimResult(mean=p_hat, std_error=std_error, draws=sim.draws)
