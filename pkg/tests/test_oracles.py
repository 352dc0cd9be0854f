import numpy as np
import pytest

from privmarket import (
    DemandRegion,
    DomainError,
    EXACT_GEOMETRY,
    GridSpec,
    SimulationSpec,
    estimate_buy_probability,
    grid_maximize,
    gross_profit_separate,
    optimize_bundle,
    optimize_separate,
    participant_reports,
    prob_buy_complement,
    prob_buy_separate,
    prob_buy_substitute,
    separate_grid,
    separate_objective,
    simulate_market,
)
from privmarket.oracles import bundle_grid, bundle_objective


class TestGridMaximize:
    def test_matches_closed_form(self, s1_scenario):
        best = grid_maximize(separate_objective(s1_scenario), separate_grid(s1_scenario))
        opt = optimize_separate(s1_scenario)
        grid = separate_grid(s1_scenario)
        assert abs(best.coords[0] - opt.r_star) <= (grid.axes[0][1] - grid.axes[0][0]) / 399 + 1e-12
        assert abs(best.coords[1] - opt.p_star) <= (grid.axes[1][1] - grid.axes[1][0]) / 399 + 1e-12
        assert best.value <= opt.profit

    def test_constant_objective_breaks_ties_low(self):
        grid = GridSpec(axes=((0.0, 1.0, 5), (2.0, 3.0, 4)))
        best = grid_maximize(lambda x, y: np.zeros_like(x * y), grid)
        assert best.coords == (0.0, 2.0)
        assert best.index == (0, 0)

    def test_bundle_grid_certifies_closed_form(self, sb1_bundle):
        best = grid_maximize(bundle_objective(sb1_bundle), bundle_grid(sb1_bundle, points=120))
        opt = optimize_bundle(sb1_bundle)
        assert abs(best.value - opt.profit) <= 1e-2 * 10  # coarse lattice sits just below
        assert opt.profit >= best.value

    def test_nested_refinement_never_decreases(self, s1_scenario):
        fn = separate_objective(s1_scenario)
        values = []
        count = 50
        for _ in range(3):
            grid = separate_grid(s1_scenario, r_points=count, fee_points=count)
            values.append(grid_maximize(fn, grid).value)
            count = 2 * count - 1  # nested lattice keeps every old point
        assert values[0] <= values[1] <= values[2]

    def test_rejects_degenerate_axes(self):
        with pytest.raises(DomainError):
            GridSpec(axes=((0.0, 1.0, 1),))
        with pytest.raises(DomainError):
            GridSpec(axes=((1.0, 0.0, 10),))


class TestSimulateMarket:
    def test_deterministic_for_fixed_seed(self, s1_scenario):
        sim = SimulationSpec(draws=300_000, seed=99)
        opt = optimize_separate(s1_scenario)
        a = simulate_market(s1_scenario, (opt.r_star, opt.p_star), sim)
        b = simulate_market(s1_scenario, (opt.r_star, opt.p_star), sim)
        assert a == b

    def test_seed_changes_stream(self, s1_scenario):
        opt = optimize_separate(s1_scenario)
        a = simulate_market(s1_scenario, (opt.r_star, opt.p_star), SimulationSpec(draws=100_000, seed=1))
        b = simulate_market(s1_scenario, (opt.r_star, opt.p_star), SimulationSpec(draws=100_000, seed=2))
        assert a.mean != b.mean

    def test_unbiased_at_reference_optimum(self, s1_scenario):
        opt = optimize_separate(s1_scenario)
        res = simulate_market(s1_scenario, (opt.r_star, opt.p_star), SimulationSpec(draws=1_000_000, seed=5))
        assert abs(res.mean - opt.profit) <= 3.0 * res.std_error

    def test_full_privacy_never_pays_data_cost(self, s1_scenario):
        # r=1 never triggers a true-data payment; a fee above the quality
        # ceiling kills revenue, so every draw is exactly zero
        res = simulate_market(s1_scenario, (1.0, 0.9), SimulationSpec(draws=50_000, seed=3))
        assert res.mean == 0.0
        assert res.std_error == 0.0

    def test_overpriced_service_earns_nothing(self, s1_scenario):
        # with r=0 every participant is paid, so each draw realizes -n*c
        res = simulate_market(s1_scenario, (0.0, 0.9), SimulationSpec(draws=50_000, seed=3))
        n, c = s1_scenario.service.n, s1_scenario.service.c
        assert res.mean == pytest.approx(-n * c, abs=1e-12)
        assert res.std_error == 0.0

    def test_bundle_unbiased(self, sb1_bundle):
        opt = optimize_bundle(sb1_bundle)
        point = (opt.r1_star, opt.r2_star, opt.p_b_star)
        res = simulate_market(sb1_bundle, point, SimulationSpec(draws=1_000_000, seed=17))
        assert abs(res.mean - opt.profit) <= 3.0 * res.std_error

    def test_rejects_invalid_point(self, s1_scenario):
        with pytest.raises(DomainError):
            simulate_market(s1_scenario, (1.5, 0.3), SimulationSpec(draws=10, seed=0))
        with pytest.raises(DomainError):
            simulate_market("not a scenario", (0.1, 0.1), SimulationSpec(draws=10, seed=0))


class TestParticipantReports:
    def test_full_privacy_all_noisy(self):
        rng = np.random.default_rng(0)
        emitted, true_mask = participant_reports(rng, 20_000, 1.0, 2.0)
        assert not true_mask.any()
        assert emitted.var() == pytest.approx(1.0 + 4.0, rel=0.05)

    def test_zero_privacy_all_true(self):
        rng = np.random.default_rng(0)
        emitted, true_mask = participant_reports(rng, 20_000, 0.0, 2.0)
        assert true_mask.all()
        assert emitted.var() == pytest.approx(1.0, rel=0.05)

    def test_true_fraction_tracks_privacy(self):
        rng = np.random.default_rng(1)
        _, true_mask = participant_reports(rng, 200_000, 0.3, 1.0)
        assert true_mask.mean() == pytest.approx(0.7, abs=0.005)


class TestEstimateBuyProbability:
    def test_separate_reference(self):
        res = estimate_buy_probability(
            DemandRegion(kind="separate", fee=0.4, u1=0.8), SimulationSpec(draws=1_000_000, seed=4)
        )
        assert abs(res.mean - 0.5) <= 3.0 * res.std_error

    def test_complement_unit_square(self):
        res = estimate_buy_probability(
            DemandRegion(kind="complement", fee=1.0, u1=1.0, u2=1.0, gamma=0.0),
            SimulationSpec(draws=1_000_000, seed=4),
        )
        assert abs(res.mean - 0.5) <= 3.0 * res.std_error

    def test_substitute_adjudicates_demand_forms(self):
        # the clipped-geometry probability matches simulation; the linear
        # form's (0.5+gamma^2) factor sits far outside the noise band
        region = DemandRegion(kind="substitute", fee=0.58, u1=0.811, u2=0.793, gamma=-0.1)
        res = estimate_buy_probability(region, SimulationSpec(draws=1_000_000, seed=4))
        exact = prob_buy_substitute(0.58, 0.811, 0.793, -0.1, EXACT_GEOMETRY)
        paper = prob_buy_substitute(0.58, 0.811, 0.793, -0.1)
        assert abs(res.mean - exact) <= 3.0 * res.std_error
        assert abs(res.mean - paper) > 3.0 * res.std_error

    def test_exact_geometry_agreement_random_regions(self):
        rng = np.random.default_rng(8)
        sim = SimulationSpec(draws=200_000, seed=12)
        for _ in range(10):
            u1, u2 = rng.uniform(0.3, 1.0, size=2)
            fee = rng.uniform(0.05, 1.2)
            kind = rng.choice(["separate", "complement", "substitute"])
            if kind == "separate":
                region = DemandRegion(kind="separate", fee=fee, u1=u1)
                expected = prob_buy_separate(fee, u1)
            elif kind == "complement":
                gamma = rng.uniform(0.0, 0.5)
                region = DemandRegion(kind="complement", fee=fee, u1=u1, u2=u2, gamma=gamma)
                expected = prob_buy_complement(fee, u1, u2, gamma, EXACT_GEOMETRY)
            else:
                gamma = rng.uniform(-0.45, -0.01)
                region = DemandRegion(kind="substitute", fee=fee, u1=u1, u2=u2, gamma=gamma)
                expected = prob_buy_substitute(fee, u1, u2, gamma, EXACT_GEOMETRY)
            res = estimate_buy_probability(region, sim)
            assert abs(res.mean - expected) <= max(3.0 * res.std_error, 1e-9)

    def test_region_validation(self):
        with pytest.raises(DomainError):
            DemandRegion(kind="bundle", fee=0.5, u1=0.8)
        with pytest.raises(DomainError):
            DemandRegion(kind="complement", fee=0.5, u1=0.8)  # missing u2/gamma
        with pytest.raises(DomainError):
            DemandRegion(kind="substitute", fee=0.5, u1=0.8, u2=0.8, gamma=0.2)


def test_simulation_spec_validation():
    with pytest.raises(DomainError):
        SimulationSpec(draws=0, seed=1)
    with pytest.raises(DomainError):
        SimulationSpec(draws=10, seed=-1)
    with pytest.raises(DomainError):
        SimulationSpec(draws=10, seed=1, sigma_z=-0.5)
