from __future__ import annotations

import math

import numpy as np
import pytest

from poolsim.analysis import (FOUR_OVER_PI, EtaBounds, RrccRow,
                              candidate_counts, eta_closed, eta_monte_carlo,
                              expected_reduction, expected_rrcc,
                              four_over_pi_monte_carlo, rrcc_gate_harness,
                              traffic_metrics)
from poolsim.geometry import Point
from poolsim.model import (Request, RequestState, Stop, StopKind, Vehicle,
                           WorldState)
from poolsim.scheduler import counts_for_path


class TestEtaClosed:
    def test_disjoint_regions_give_four_over_pi(self):
        b = eta_closed(2.0, 4.0, 0.0, 0.0)
        assert b.exact == pytest.approx(FOUR_OVER_PI, rel=1e-12)
        assert b.lo == pytest.approx(FOUR_OVER_PI, rel=1e-12)
        assert b.hi == pytest.approx(FOUR_OVER_PI, rel=1e-12)

    def test_single_region(self):
        b = eta_closed(0.0, 7.5, 0.0, 0.0)
        assert b.exact == pytest.approx(FOUR_OVER_PI, rel=1e-12)
        assert b.lo == b.hi == pytest.approx(FOUR_OVER_PI, rel=1e-12)

    def test_hand_computed_overlapping_case(self):
        alpha, beta, mu, nu = 2.0, 4.0, 1.0, 0.9
        b = eta_closed(alpha, beta, mu, nu)
        opt = math.pi / 4.0 * (alpha + beta)
        assert b.exact == pytest.approx((alpha + beta - mu) / (opt - nu))
        assert b.hi == pytest.approx(
            FOUR_OVER_PI + (4.0 - math.pi) * mu / (math.pi * (opt - nu)))
        assert b.lo == pytest.approx(max(
            1.0, FOUR_OVER_PI + (4.0 * nu - math.pi * mu) / (math.pi * opt)))

    def test_lower_bound_floors_at_one(self):
        # heavy rectangle overlap with tiny ellipse overlap drags the raw
        # bound under 1, where the floor takes over
        b = eta_closed(4.0, 4.0, 3.0, 0.1)
        assert b.lo == 1.0

    @pytest.mark.parametrize("alpha,beta,mu,nu", [
        (-1.0, 2.0, 0.0, 0.0),
        (1.0, 0.0, 0.0, 0.0),
        (1.0, 2.0, 1.5, 0.0),     # mu > min(alpha, beta)
        (1.0, 2.0, 0.5, 0.6),     # nu > mu
        (1.0, 100.0, 1.0, 0.9),   # nu > pi/4 * alpha
    ])
    def test_invalid_inputs_raise(self, alpha, beta, mu, nu):
        with pytest.raises(ValueError):
            eta_closed(alpha, beta, mu, nu)


def random_union_config(rng):
    o = Point(float(rng.uniform(-5, 5)), float(rng.uniform(-5, 5)))
    d = Point(float(rng.uniform(-5, 5)), float(rng.uniform(-5, 5)))
    e_od = math.hypot(o.x - d.x, o.y - d.y)
    if e_od < 0.5:
        return None
    direct = e_od * float(rng.uniform(1.0, 1.4))
    f_beta = (o, d, (1.0 + float(rng.uniform(0.05, 0.5))) * direct)
    p_s = Point(float(rng.uniform(-5, 5)), float(rng.uniform(-5, 5)))
    e_ps = math.hypot(p_s.x - o.x, p_s.y - o.y)
    if e_ps < 0.3:
        return None
    f_alpha = (p_s, o, e_ps * float(rng.uniform(1.05, 2.0)))
    return f_alpha, f_beta


class TestEtaMonteCarlo:
    def test_single_region_converges_to_four_over_pi(self):
        est = four_over_pi_monte_carlo(200_000, seed=0)
        assert est == pytest.approx(FOUR_OVER_PI, abs=0.01)

    def test_seeded_runs_identical(self):
        f_beta = (Point(0, 0), Point(3, 1), 5.0)
        f_alpha = (Point(-2, 0), Point(0, 0), 4.0)
        a = eta_monte_carlo(f_alpha, f_beta, 50_000, seed=13)
        b = eta_monte_carlo(f_alpha, f_beta, 50_000, seed=13)
        assert a == b

    def test_different_seeds_differ(self):
        f_beta = (Point(0, 0), Point(3, 1), 5.0)
        a = eta_monte_carlo(None, f_beta, 20_000, seed=1)
        b = eta_monte_carlo(None, f_beta, 20_000, seed=2)
        assert a.eta != b.eta

    def test_estimate_never_below_one(self):
        # the ellipse union is contained in the rectangle union pointwise,
        # so the ratio cannot dip under 1 even with sampling noise
        for seed in range(5):
            est = eta_monte_carlo(
                (Point(-1, 0), Point(0, 0), 2.0),
                (Point(0, 0), Point(2, 2), 4.0), 5_000, seed=seed)
            assert est.eta >= 1.0

    @pytest.mark.parametrize("seed", range(20))
    def test_estimate_within_closed_form_bounds(self, seed):
        rng = np.random.default_rng(1000 + seed)
        cfg = None
        while cfg is None:
            cfg = random_union_config(rng)
        f_alpha, f_beta = cfg
        if seed % 5 == 0:
            f_alpha = None
        est = eta_monte_carlo(f_alpha, f_beta, 100_000, seed=seed)
        slack = 5.0 * est.se + 1e-9
        assert est.lo - slack <= est.eta <= est.hi + slack

    def test_overlap_estimates_feasible(self):
        f_beta = (Point(0, 0), Point(1, 0), 2.0)
        f_alpha = (Point(-0.5, 0), Point(0, 0), 1.5)
        est = eta_monte_carlo(f_alpha, f_beta, 50_000, seed=3)
        assert 0.0 <= est.mu <= min(est.alpha_area, est.beta_area)
        assert 0.0 <= est.nu <= est.mu

    def test_rejects_bad_inputs(self):
        f_beta = (Point(0, 0), Point(3, 0), 5.0)
        with pytest.raises(ValueError):
            eta_monte_carlo(None, f_beta, 0, seed=0)
        with pytest.raises(ValueError):
            eta_monte_carlo(None, (Point(0, 0), Point(6, 0), 5.0), 100,
                            seed=0)


class TestExpectedRrcc:
    def test_extremes(self):
        assert expected_rrcc(100.0, 100.0) == (0.0, 0.0)
        assert expected_rrcc(0.0, 100.0) == (1.0, 1.0)

    def test_reference_fraction(self):
        psi_a, psi_b = expected_rrcc(30.0, 100.0)
        assert psi_a == pytest.approx(0.91)
        assert psi_b == pytest.approx(0.70)

    @pytest.mark.parametrize("area,s", [(1.0, 0.0), (1.0, -2.0),
                                        (-0.1, 1.0), (1.1, 1.0)])
    def test_domain_errors(self, area, s):
        with pytest.raises(ValueError):
            expected_rrcc(area, s)


class TestCandidateCounts:
    def test_matches_brute_force(self):
        for k in range(1, 51):
            pairs = [(i, j) for i in range(1, k + 1)
                     for j in range(i + 1, k + 2)]
            n_a = sum(1 for i, j in pairs if j <= k)
            n_b = sum(1 for i, j in pairs if j == k + 1 and i < k)
            n_c = sum(1 for i, j in pairs if j == k + 1 and i == k)
            assert candidate_counts(k) == (n_a, n_b, n_c)

    def test_agrees_with_scheduler_counts(self):
        for k in range(1, 20):
            assert candidate_counts(k) == counts_for_path(k)

    def test_rejects_empty_path(self):
        with pytest.raises(ValueError):
            candidate_counts(0)


class TestExpectedReduction:
    def test_no_region_coverage_saves_everything_testable(self):
        # area == S: the gates pass everything, nothing is saved
        assert expected_reduction(4, 100.0, 100.0) == 0.0

    def test_single_stop_path_has_no_gateable_cases(self):
        assert expected_reduction(1, 30.0, 100.0) == 0.0

    def test_reference_value(self):
        assert expected_reduction(3, 30.0, 100.0) == pytest.approx(4.13)


class TestRrccGateHarness:
    def test_reference_rates(self):
        row = rrcc_gate_harness(0.3, samples=20_000, seed=0)
        assert row.area == pytest.approx(30.0)
        assert row.s == pytest.approx(100.0)
        assert row.expected_psi_a == pytest.approx(0.91)
        assert row.expected_psi_b == pytest.approx(0.70)
        assert row.psi_a == pytest.approx(0.91, abs=0.02)
        assert row.psi_b == pytest.approx(0.70, abs=0.02)

    def test_full_coverage_never_rejects(self):
        row = rrcc_gate_harness(1.0, samples=2_000, seed=1)
        assert row.psi_a == 0.0
        assert row.psi_b == 0.0

    def test_seeded_reproducibility(self):
        a = rrcc_gate_harness(0.1, samples=5_000, seed=4)
        b = rrcc_gate_harness(0.1, samples=5_000, seed=4)
        assert a == b

    @pytest.mark.parametrize("fraction", [0.0, -0.2, 1.5])
    def test_bad_fraction_raises(self, fraction):
        with pytest.raises(ValueError):
            rrcc_gate_harness(fraction, samples=100, seed=0)


def _mk_request(rid, state, n=1, direct=1.0, t=0.0):
    return Request(id=rid, t=t, n=n, o=0, d=1, direct_dist=direct,
                   state=state)


def _stop():
    return Stop(StopKind.DESTINATION, 99, 0)


class TestTrafficMetrics:
    def test_snapshot_rates(self):
        vehicles = {
            0: Vehicle(id=0, capacity=5, node=0, odometer=50.0,
                       service_list=[1], path=[_stop()]),
            1: Vehicle(id=1, capacity=5, node=0, odometer=40.0,
                       service_list=[2], path=[_stop()]),
            2: Vehicle(id=2, capacity=5, node=0, odometer=30.0,
                       service_list=[3], path=[_stop()]),
            3: Vehicle(id=3, capacity=5, node=0),
        }
        requests = {
            1: _mk_request(1, RequestState.ONBOARD, n=2),
            2: _mk_request(2, RequestState.ONBOARD, n=3),
            3: _mk_request(3, RequestState.ONBOARD, n=1),
            4: _mk_request(4, RequestState.COMPLETED, direct=100.0),
            5: _mk_request(5, RequestState.UNSCHEDULED, t=10.0),
            6: _mk_request(6, RequestState.UNSCHEDULED, t=500.0),
        }
        tm = traffic_metrics(WorldState(clock=20.0, vehicles=vehicles,
                                        requests=requests))
        assert tm.moving == 3
        assert tm.busy == 3
        assert tm.onboard_riders == 6
        assert tm.sharing_rate == pytest.approx(2.0)
        assert tm.utilization == pytest.approx(0.75)
        assert tm.busy_rate == pytest.approx(0.75)
        assert tm.saved_km == pytest.approx(100.0 - 120.0)
        assert tm.completed == 1
        assert tm.unserved == 1   # the 500 s release is not out yet

    def test_idle_fleet_has_no_sharing_rate(self):
        vehicles = {0: Vehicle(id=0, capacity=5, node=0)}
        tm = traffic_metrics(WorldState(clock=0.0, vehicles=vehicles,
                                        requests={}))
        assert tm.sharing_rate is None
        assert tm.moving == 0
        assert tm.utilization == 0.0

    def test_empty_world(self):
        tm = traffic_metrics(WorldState(clock=0.0, vehicles={}, requests={}))
        assert tm.utilization == 0.0
        assert tm.busy_rate == 0.0
        assert tm.saved_km == 0.0
