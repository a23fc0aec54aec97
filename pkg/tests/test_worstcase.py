import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import non_edcr_bid, random_edcr_bid
from socreg.bids import SegmentedBid, StorageAsset
from socreg.costs import approx_cost_fcheck, edcr_cost, f_b, interval_soc_path
from socreg.errors import EdcrError, InstanceTooLarge, SocRangeError
from socreg.worstcase import (
    WorstCaseQuery,
    aggregate_worst_cost,
    analytical_worst_cost,
    binding_trajectory,
    brute_force_worst_cost,
)

EDCR2 = SegmentedBid((0.0, 5.0, 10.0), (10.0, 8.0), (4.0, 6.0), 1.0)


def random_query(rng, bid, steps=4):
    e0 = rng.uniform(bid.soc_min, bid.soc_max)
    r_up = rng.uniform(0, e0 - bid.soc_min)
    r_down = rng.uniform(0, (bid.soc_max - e0) / bid.efficiency)
    return WorstCaseQuery(r_up, r_down, e0, bid, steps=steps)


class TestBruteForce:
    def test_zero_capacities(self):
        cost, traj = brute_force_worst_cost(WorstCaseQuery(0.0, 0.0, 5.0, EDCR2))
        assert cost == 0.0
        assert traj.up_energy == 0.0 and traj.down_energy == 0.0

    def test_returned_trajectory_attains_cost(self):
        q = WorstCaseQuery(2.0, 3.0, 5.0, non_edcr_bid(), steps=3)
        cost, traj = brute_force_worst_cost(q)
        assert f_b(traj, q.e0, q.bid) == pytest.approx(cost, abs=1e-9)

    def test_size_limit(self):
        with pytest.raises(InstanceTooLarge):
            brute_force_worst_cost(WorstCaseQuery(1.0, 1.0, 5.0, EDCR2, steps=7))

    def test_query_validation(self):
        with pytest.raises(ValueError):
            WorstCaseQuery(-1.0, 0.0, 5.0, EDCR2)
        with pytest.raises(ValueError):
            WorstCaseQuery(1.0, 0.0, 5.0, EDCR2, grid_levels=1)

    def test_non_edcr_more_steps_never_cheaper(self):
        # [DERIVED] the J=2 grid is contained in the J=4 grid (trailing idle steps)
        rng = np.random.default_rng(3)
        for _ in range(10):
            q = random_query(rng, non_edcr_bid(), steps=2)
            small, _ = brute_force_worst_cost(q)
            large, _ = brute_force_worst_cost(WorstCaseQuery(q.r_up, q.r_down, q.e0, q.bid,
                                                             steps=4))
            assert large >= small - 1e-12

    def test_worst_case_dominates_both_orderings(self):
        rng = np.random.default_rng(5)
        bid = non_edcr_bid()
        for _ in range(10):
            q = random_query(rng, bid, steps=2)
            worst, _ = brute_force_worst_cost(q)
            assert worst >= approx_cost_fcheck(bid, q.r_up, q.r_down, q.e0) - 1e-12


class TestAnalytical:
    def test_zero(self):
        assert analytical_worst_cost(EDCR2, 0.0, 0.0, 3.0) == pytest.approx(0.0, abs=1e-12)

    def test_single_segment(self):
        b = SegmentedBid((0.0, 10.0), (9.0,), (2.0,), 0.9)
        assert analytical_worst_cost(b, 1.0, 2.0, 5.0) == pytest.approx(9.0 + 4.0)

    def test_errors(self):
        with pytest.raises(EdcrError):
            analytical_worst_cost(non_edcr_bid(), 1.0, 1.0, 5.0)
        with pytest.raises(SocRangeError):
            analytical_worst_cost(EDCR2, 6.0, 0.0, 5.0)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_matches_brute_force(self, seed):
        rng = np.random.default_rng(seed)
        q = random_query(rng, random_edcr_bid(rng, int(rng.integers(1, 5))))
        brute, traj = brute_force_worst_cost(q)
        assert brute == pytest.approx(analytical_worst_cost(q.bid, q.r_up, q.r_down, q.e0),
                                      abs=1e-8)
        assert traj.up_energy == pytest.approx(q.r_up, abs=1e-12)
        assert traj.down_energy == pytest.approx(q.r_down, abs=1e-12)

    def test_binding_trajectory_is_a_maximizer(self):
        traj = binding_trajectory(2.0, 3.0)
        assert traj.up_energy == pytest.approx(2.0)
        assert traj.down_energy == pytest.approx(3.0)
        assert f_b(traj, 5.0, EDCR2) == pytest.approx(analytical_worst_cost(EDCR2, 2.0, 3.0, 5.0))
        with pytest.raises(ValueError):
            binding_trajectory(1.0, 1.0, steps=1)


class TestAggregate:
    def test_single_interval(self):
        st_ = StorageAsset(EDCR2, 5.0)
        assert aggregate_worst_cost(st_, [2.0], [1.0]) == pytest.approx(
            analytical_worst_cost(EDCR2, 2.0, 1.0, 5.0))

    def test_zero(self):
        assert aggregate_worst_cost(StorageAsset(EDCR2, 5.0), [0, 0, 0], [0, 0, 0]) == \
            pytest.approx(0.0, abs=1e-12)

    def test_range_error_reports_interval(self):
        with pytest.raises(SocRangeError) as info:
            aggregate_worst_cost(StorageAsset(EDCR2, 5.0), [1.0, 0.0], [0.0, 7.0])
        assert info.value.index == 1

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_sum_equals_horizon_cost(self, seed):
        rng = np.random.default_rng(seed)
        bid = random_edcr_bid(rng)
        T = int(rng.integers(1, 7))
        s = rng.uniform(bid.soc_min, bid.soc_max)
        r_up, r_down = np.zeros(T), np.zeros(T)
        e = s
        for t in range(T):  # keep every intra-interval excursion in range
            r_up[t] = rng.uniform(0, e - bid.soc_min)
            r_down[t] = rng.uniform(0, (bid.soc_max - e) / bid.efficiency)
            if e - r_up[t] + bid.efficiency * r_down[t] > bid.soc_max:
                r_down[t] = 0.0
            e = e - r_up[t] + bid.efficiency * r_down[t]
        path = interval_soc_path(bid, r_up, r_down, s)
        assert path.min() >= bid.soc_min - 1e-12 and path.max() <= bid.soc_max + 1e-12
        total = aggregate_worst_cost(StorageAsset(bid, s), r_up, r_down)
        assert total == pytest.approx(edcr_cost(bid, r_up, r_down, s), abs=1e-8)
