"""Random instance builders and small oracles shared by the test modules."""

from __future__ import annotations

import itertools

import numpy as np

from socreg.bids import SegmentedBid, StorageAsset, check_edcr
from socreg.costs import AGC_STEP_HOURS, MileageTrajectory
from socreg.errors import SolverError
from socreg.market import ClearingProblem, GeneratorAsset, NetworkModel, clear_convex

INF = float("inf")


def random_edcr_bid(rng: np.random.Generator, K: int | None = None,
                    eta: float | None = None, span: float = 10.0) -> SegmentedBid:
    """EDCR bid: random nonincreasing up costs, down costs rebuilt with ratio eta."""
    K = int(rng.integers(1, 6)) if K is None else K
    eta = float(rng.uniform(0.7, 1.0)) if eta is None else eta
    inner = np.sort(rng.uniform(0.0, span, K - 1))
    while K > 1 and np.min(np.diff(np.concatenate([[0.0], inner, [span]]))) < 0.2:
        inner = np.sort(rng.uniform(0.0, span, K - 1))
    bp = np.concatenate([[0.0], inner, [span]])
    au = np.sort(rng.uniform(2.0, 20.0, K))[::-1]
    ad1 = rng.uniform(1.0, 10.0)
    ad = ad1 + eta * np.concatenate([[0.0], np.cumsum(au[:-1] - au[1:])])
    bid = SegmentedBid(tuple(bp), tuple(au), tuple(ad), eta)
    assert check_edcr(bid)
    return bid


def non_edcr_bid() -> SegmentedBid:
    """K=2, eta=1 bid with a^d decrement 3 against an a^u decrement 2."""
    return SegmentedBid((0.0, 5.0, 10.0), (10.0, 8.0), (4.0, 7.0), 1.0)


def random_trajectory(rng: np.random.Generator, bid: SegmentedBid, e0: float, J: int,
                      step_hours: float = AGC_STEP_HOURS) -> MileageTrajectory:
    """Random one-direction-per-step trajectory whose SoC stays inside the bid range."""
    eta = bid.efficiency
    energies = []
    soc = e0
    for _ in range(J):
        kind = rng.integers(0, 3)
        if kind == 1:  # up: discharge up to what is stored
            v = -rng.uniform(0.0, 1.0) * (soc - bid.soc_min)
        elif kind == 2:  # down: charge up to the headroom
            v = rng.uniform(0.0, 1.0) * (bid.soc_max - soc) / eta
        else:
            v = 0.0
        soc += eta * max(v, 0.0) + min(v, 0.0)
        soc = min(max(soc, bid.soc_min), bid.soc_max)
        energies.append(v)
    return MileageTrajectory.from_energies(energies, step_hours)


def enumerate_vertices(c, A_ub, b_ub, tol: float = 1e-9):
    """Minimize ``c x`` over ``A_ub x <= b_ub, x >= 0`` by enumerating basic solutions.

    Returns ``None`` when the feasible set is empty. The caller is responsible
    for bounding the polytope (all tests add an explicit box).
    """
    A_ub = np.asarray(A_ub, dtype=float)
    n = A_ub.shape[1]
    A = np.vstack([A_ub, -np.eye(n)])
    b = np.concatenate([b_ub, np.zeros(n)])
    best = None
    for rows in itertools.combinations(range(A.shape[0]), n):
        sub = A[list(rows)]
        if abs(np.linalg.det(sub)) < 1e-12:
            continue
        x = np.linalg.solve(sub, b[list(rows)])
        if np.all(A @ x <= b + tol):
            value = float(c @ x)
            if best is None or value < best:
                best = value
    return best


def random_clearing_problem(rng: np.random.Generator, n_bus: int, T: int,
                            n_storage: int = 1) -> ClearingProblem:
    """Random DC-network instance: one generator per bus, storages on random buses."""
    lines = n_bus - 1
    S = rng.uniform(-0.6, 0.6, (lines, n_bus)) if lines else np.zeros((0, n_bus))
    if lines:
        S[:, 0] = 0.0  # bus 0 is the slack
    demand = rng.uniform(10.0, 40.0, (T, n_bus))
    limits = rng.uniform(3.0, 15.0, lines)
    gens = []
    for m in range(n_bus):
        pieces = ((rng.uniform(20, 60), rng.uniform(10, 30)), (INF, rng.uniform(30, 60)))
        gens.append(GeneratorAsset(
            f"G{m}", pieces, g_max=float(rng.uniform(120, 200)),
            reg_up_cost=float(rng.uniform(3, 15)), reg_down_cost=float(rng.uniform(3, 15)),
            reg_up_cap=float(rng.uniform(5, 20)), reg_down_cap=float(rng.uniform(5, 20)), bus=m))
    storages = []
    for s in range(n_storage):
        bid = random_edcr_bid(rng, span=float(rng.uniform(5, 15)))
        soc = float(rng.uniform(bid.soc_min, bid.soc_max))
        storages.append(StorageAsset(bid, soc, float(rng.uniform(2, 10)),
                                     float(rng.uniform(2, 10)), f"S{s}",
                                     int(rng.integers(0, n_bus))))
    up = tuple(rng.uniform(5.0, 20.0, T))
    down = tuple(rng.uniform(5.0, 20.0, T))
    return ClearingProblem(NetworkModel(S, limits, demand), tuple(gens), tuple(storages), up, down)


def feasible_instances(seed: int, count: int, max_bus: int = 3, max_T: int = 8):
    """``count`` solvable random instances as ``(problem, convex result)`` pairs."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        problem = random_clearing_problem(rng, int(rng.integers(1, max_bus + 1)),
                                          int(rng.integers(1, max_T + 1)),
                                          int(rng.integers(1, 3)))
        try:
            out.append((problem, clear_convex(problem)))
        except SolverError:
            continue
    return out


def single_bus_problem(storage: StorageAsset, T: int = 2, demand: float = 50.0,
                       gen_cost: float = 20.0, up_cost: float = 8.0, down_cost: float = 6.0,
                       up_cap: float = 15.0, down_cap: float = 15.0, req: float = 15.0,
                       ) -> ClearingProblem:
    gen = GeneratorAsset("G", ((INF, gen_cost),), g_max=200.0, reg_up_cost=up_cost,
                         reg_down_cost=down_cost, reg_up_cap=up_cap, reg_down_cap=down_cap)
    return ClearingProblem(NetworkModel.single_bus([demand] * T), (gen,), (storage,),
                           (req,) * T, (req,) * T)
