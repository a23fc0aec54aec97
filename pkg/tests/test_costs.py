import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import non_edcr_bid, random_edcr_bid, random_trajectory
from socreg.bids import SegmentedBid
from socreg.costs import (
    AGC_STEP_HOURS,
    MileageTrajectory,
    active_segment,
    approx_cost_fcheck,
    approx_cost_path,
    closed_form_alpha,
    closed_form_h,
    down_step_cost,
    edcr_cost,
    f_b,
    f_down,
    f_up,
    soc_path,
    up_step_cost,
)
from socreg.errors import EdcrError, SocRangeError
from socreg.worstcase import WorstCaseQuery, brute_force_worst_cost

DELTA = AGC_STEP_HOURS
EDCR2 = SegmentedBid((0.0, 5.0, 10.0), (10.0, 8.0), (4.0, 6.0), 1.0)


def overlap(lo, hi, a, b):
    return max(0.0, min(hi, b) - max(lo, a))


def area_down(bid, start, energy):
    """Oracle: grid energy drawn inside each segment times that segment's down cost."""
    end = start + bid.efficiency * energy
    bp = bid.breakpoints
    return sum(a * overlap(start, end, bp[k], bp[k + 1]) / bid.efficiency
               for k, a in enumerate(bid.down_costs))


def area_up(bid, start, energy):
    bp = bid.breakpoints
    return sum(a * overlap(start - energy, start, bp[k], bp[k + 1])
               for k, a in enumerate(bid.up_costs))


def closed_form_oracle(bid, e0, up_energy, down_energy):
    """Closed form max_j {alpha_j(e0) + a^d_j D + a^u_j U}, built from the alpha helper."""
    return max(closed_form_alpha(bid, e0, j) + bid.down_costs[j] * down_energy
               + bid.up_costs[j] * up_energy for j in range(bid.n_segments))


class TestSocPath:
    def test_zero_mileage(self):
        traj = MileageTrajectory((0, 0, 0), (0, 0, 0))
        assert np.all(soc_path(traj, 5.0, EDCR2) == 5.0)

    def test_charge_then_discharge_cancels(self):
        traj = MileageTrajectory((0.0, 1.0), (1.0, 0.0))
        assert soc_path(traj, 5.0, EDCR2) == pytest.approx([5, 5 + DELTA, 5], abs=1e-15)

    def test_lossy_round_trip(self):
        # [DERIVED] 5 + 0.9*delta - delta
        b = SegmentedBid((0.0, 10.0), (1.0,), (1.0,), 0.9)
        traj = MileageTrajectory((0.0, 1.0), (1.0, 0.0))
        assert soc_path(traj, 5.0, b)[-1] == pytest.approx(5 - 0.1 * DELTA, abs=1e-15)

    def test_trajectory_rejects_simultaneous_mileage(self):
        with pytest.raises(ValueError):
            MileageTrajectory((1.0,), (1.0,))
        with pytest.raises(ValueError):
            MileageTrajectory((-1.0,), (0.0,))


class TestStepCosts:
    def test_zero_mileage(self):
        assert f_down(0.0, 3.0, EDCR2) == 0.0
        assert f_up(0.0, 3.0, EDCR2) == 0.0

    def test_single_segment(self):
        assert f_down(100.0, 1.0, EDCR2) == pytest.approx(4.0 * 100 * DELTA)
        assert f_up(100.0, 9.0, EDCR2) == pytest.approx(8.0 * 100 * DELTA)

    def test_down_crossing(self):
        # [DERIVED] split at E_2: 0.1 MWh at 4 plus 0.1 MWh at 6 = 1.0
        x = 0.2 / DELTA
        assert f_down(x, 4.9, EDCR2) == pytest.approx(1.0, abs=1e-12)
        split = f_down(0.1 / DELTA, 4.9, EDCR2) + f_down(0.1 / DELTA, 5.0, EDCR2)
        assert split == pytest.approx(1.0, abs=1e-12)

    def test_up_crossing(self):
        # [DERIVED] 5.1 -> 4.9: 0.1 MWh at 8 plus 0.1 MWh at 10 = 1.8
        assert f_up(0.2 / DELTA, 5.1, EDCR2) == pytest.approx(1.8, abs=1e-12)

    def test_out_of_range(self):
        with pytest.raises(SocRangeError):
            f_down(1.0 / DELTA, 9.5, EDCR2)
        with pytest.raises(SocRangeError):
            f_up(1.0 / DELTA, 0.5, EDCR2)

    @settings(max_examples=80, deadline=None)
    @given(st.integers(0, 2**31 - 1), st.booleans())
    def test_matches_area_oracle_and_splits(self, seed, edcr):
        rng = np.random.default_rng(seed)
        bid = random_edcr_bid(rng, int(rng.integers(1, 6)))
        if not edcr:  # perturb the down costs while keeping them monotone
            bid = SegmentedBid(bid.breakpoints, bid.up_costs,
                               tuple(np.sort(rng.uniform(0, 20, bid.n_segments))),
                               bid.efficiency)
        eta = bid.efficiency
        start = rng.uniform(bid.soc_min, bid.soc_max)
        energy = rng.uniform(0, (bid.soc_max - start) / eta)
        assert down_step_cost(bid, energy, start) == pytest.approx(
            area_down(bid, start, energy), abs=1e-10)
        cut = rng.uniform(0, energy)
        split = (down_step_cost(bid, cut, start)
                 + down_step_cost(bid, energy - cut, start + eta * cut))
        assert split == pytest.approx(down_step_cost(bid, energy, start), abs=1e-10)
        energy = rng.uniform(0, start - bid.soc_min)
        assert up_step_cost(bid, energy, start) == pytest.approx(
            area_up(bid, start, energy), abs=1e-10)
        cut = rng.uniform(0, energy)
        split = up_step_cost(bid, cut, start) + up_step_cost(bid, energy - cut, start - cut)
        assert split == pytest.approx(up_step_cost(bid, energy, start), abs=1e-10)


class TestTrajectoryCost:
    def test_zero_trajectory(self):
        assert f_b(MileageTrajectory((0.0,) * 4, (0.0,) * 4), 5.0, EDCR2) == 0.0

    def test_range_error_names_step(self):
        traj = MileageTrajectory.from_energies([1.0, 6.0])
        with pytest.raises(SocRangeError) as info:
            f_b(traj, 5.0, EDCR2)
        assert info.value.index == 1

    def test_edcr_orderings_agree(self):
        # [DERIVED] up 2 then down 2 from 5: 10*2 + 4*2 = 28; down first: 6*2 + 8*2 = 28
        a = MileageTrajectory.from_energies([-2.0, 2.0])
        b = MileageTrajectory.from_energies([2.0, -2.0])
        assert f_b(a, 5.0, EDCR2) == pytest.approx(28.0)
        assert f_b(b, 5.0, EDCR2) == pytest.approx(28.0)

    def test_non_edcr_orderings_differ(self):
        # [DERIVED] a^d = (4, 7): up first 20 + 8 = 28; down first 7*2 + 8*2 = 30
        bid = non_edcr_bid()
        a = MileageTrajectory.from_energies([-2.0, 2.0])
        b = MileageTrajectory.from_energies([2.0, -2.0])
        assert f_b(a, 5.0, bid) == pytest.approx(28.0)
        assert f_b(b, 5.0, bid) == pytest.approx(30.0)

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_closed_form_oracle_closed_form(self, seed):
        rng = np.random.default_rng(seed)
        bid = random_edcr_bid(rng)
        e0 = rng.uniform(bid.soc_min, bid.soc_max)
        traj = random_trajectory(rng, bid, e0, int(rng.integers(1, 21)))
        expected = closed_form_oracle(bid, e0, traj.up_energy, traj.down_energy)
        assert f_b(traj, e0, bid) == pytest.approx(expected, abs=1e-8)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_path_independence(self, seed):
        rng = np.random.default_rng(seed)
        bid = random_edcr_bid(rng)
        e0 = rng.uniform(bid.soc_min, bid.soc_max)
        traj = random_trajectory(rng, bid, e0, 8)
        signed = np.asarray(traj.down) - np.asarray(traj.up)
        for _ in range(50):  # a reordering of the same steps that stays in range
            perm = signed[rng.permutation(signed.size)] * DELTA
            path = soc_path(MileageTrajectory.from_energies(perm), e0, bid)
            if path.min() >= bid.soc_min and path.max() <= bid.soc_max:
                break
        else:
            perm = signed * DELTA
        other = MileageTrajectory.from_energies(perm)
        assert other.up_energy == pytest.approx(traj.up_energy)
        assert f_b(other, e0, bid) == pytest.approx(f_b(traj, e0, bid), abs=1e-8)


class TestClosedForm:
    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_own_segment_alpha_is_zero(self, seed):
        rng = np.random.default_rng(seed)
        bid = random_edcr_bid(rng)
        s = rng.uniform(bid.soc_min, bid.soc_max)
        assert closed_form_alpha(bid, s, bid.segment(s)) == pytest.approx(0.0, abs=1e-9)
        # [DERIVED] all other pieces are nonpositive, so zero capacities cost 0
        assert edcr_cost(bid, [0.0], [0.0], s) == pytest.approx(0.0, abs=1e-9)

    def test_single_segment_h(self):
        b = SegmentedBid((1.0, 9.0), (5.0,), (3.0,), 0.8)
        assert closed_form_h(b, 4.0) == pytest.approx(3.0 * (1.0 - 4.0) / 0.8)
        assert closed_form_alpha(b, 4.0, 0) == pytest.approx(0.0)


class TestEdcrCost:
    def test_single_segment_linear(self):
        b = SegmentedBid((0.0, 10.0), (7.0,), (3.0,), 1.0)
        assert edcr_cost(b, [1, 2], [2, 0.5], 5.0) == pytest.approx(7 * 3 + 3 * 2.5)

    def test_worked_crossing_example(self):
        # [DERIVED] discharge 10 -> 4: 5 MWh in segment 2 at 8, 1 MWh in segment 1 at 10
        value = edcr_cost(EDCR2, [6.0], [0.0], 10.0)
        assert value == pytest.approx(50.0, abs=1e-12)
        oracle, _ = brute_force_worst_cost(WorstCaseQuery(6.0, 0.0, 10.0, EDCR2))
        assert oracle == pytest.approx(50.0, abs=1e-9)
        assert active_segment(EDCR2, [6.0], [0.0], 10.0) == 0

    def test_errors(self):
        with pytest.raises(EdcrError):
            edcr_cost(non_edcr_bid(), [1.0], [0.0], 5.0)
        with pytest.raises(SocRangeError) as info:
            edcr_cost(EDCR2, [3.0, 3.0], [0.0, 0.0], 5.0)
        assert info.value.index == 2

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_convex_and_monotone(self, seed):
        rng = np.random.default_rng(seed)
        bid = random_edcr_bid(rng)
        T = int(rng.integers(1, 5))
        s = rng.uniform(bid.soc_min, bid.soc_max)

        def cost(x):
            return edcr_cost(bid, x[:T], x[T:], s, check=False)

        x, y = rng.uniform(0, 3, 2 * T), rng.uniform(0, 3, 2 * T)
        assert cost((x + y) / 2) <= (cost(x) + cost(y)) / 2 + 1e-9
        bump = x.copy()
        bump[int(rng.integers(0, 2 * T))] += rng.uniform(0, 1)
        assert cost(bump) >= cost(x) - 1e-12


class TestApproxCost:
    def test_no_up_capacity(self):
        assert approx_cost_fcheck(EDCR2, 0.0, 2.0, 4.0) == pytest.approx(
            f_down(2.0 / DELTA, 4.0, EDCR2))

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_unidirectional_matches_edcr_cost(self, seed):
        rng = np.random.default_rng(seed)
        bid = random_edcr_bid(rng)
        e = rng.uniform(bid.soc_min, bid.soc_max)
        r_up = rng.uniform(0, e - bid.soc_min)
        assert approx_cost_fcheck(bid, r_up, 0.0, e) == pytest.approx(
            edcr_cost(bid, [r_up], [0.0], e), abs=1e-9)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_never_above_worst_case(self, seed):
        rng = np.random.default_rng(seed)
        bid = SegmentedBid((0.0, 4.0, 10.0), (12.0, 6.0), tuple(np.sort(rng.uniform(1, 15, 2))))
        e = rng.uniform(3, 7)
        r_up, r_down = rng.uniform(0, e - 0.5), rng.uniform(0, 9.5 - e)
        worst, _ = brute_force_worst_cost(WorstCaseQuery(r_up, r_down, e, bid, steps=3))
        assert approx_cost_fcheck(bid, r_up, r_down, e) <= worst + 1e-9

    def test_infeasible_ordering_falls_back(self):
        # down-first would overflow 10; only up-then-down is evaluated
        value = approx_cost_fcheck(EDCR2, 2.0, 2.0, 10.0)
        assert value == pytest.approx(8 * 2 + 6 * 2)
        with pytest.raises(SocRangeError):
            approx_cost_fcheck(EDCR2, 11.0, 0.0, 5.0)

    def test_path_sum(self):
        total = approx_cost_path(EDCR2, [1.0, 0.0], [0.0, 1.0], 5.0)
        assert total == pytest.approx(10 * 1 + 4 * 1)
