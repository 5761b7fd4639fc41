"""Independent brute-force oracles for validating the per-slot solver.

The exhaustive grid oracle enumerates per-user rate grids (200 log-spaced
levels per user by default) and picks the feasible combination with the
smallest hinge objective, refining the grid around the incumbent for a few
rounds to beat discretization error at binding constraints.  It shares no
code path with the closed-form dual solver.  A golden-section oracle
covers the one-user-given-dual subproblem.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from qoesim.channel import MULTIPLIER_HI, MULTIPLIER_LO, draw_p_avg
from qoesim.ratequality import R_MAX_DEFAULT, R_MIN_DEFAULT, SyntheticSource
from qoesim.rngtools import substream
from qoesim.slotsolver import SlotProblem, hinge_objective, solve_slot

GRID_XS = np.array([30.0, 40.0, 50.0, 60.0, 70.0])


def user_hinge(problem: SlotProblem, user: int, rates) -> np.ndarray:
    """phi_u evaluated on a 1-D array of candidate rates."""
    rates = np.asarray(rates, dtype=float)
    q = problem.alpha[user] * np.log(rates) + problem.beta[user]
    hinge = np.maximum(problem.xs[user][None, :] - q[:, None], 0.0)
    return hinge @ problem.weights[user]


def golden_section_min(f, lo: float, hi: float, tol: float = 1e-10) -> float:
    """Argmin of a unimodal (convex) scalar function on [lo, hi]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol * max(1.0, abs(a)):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def _grid_argmin(problem: SlotProblem, grids: list[np.ndarray]):
    """Best feasible index tuple over the cartesian grid, or None.

    Separable structure keeps this polynomial: user costs and utilizations
    are precomputed per level; for three users the first two are folded
    into a utilization-sorted prefix-minimum table.
    """
    n = problem.n_users
    budget = float(problem.budget) + 1e-12
    costs = [user_hinge(problem, u, grids[u]) for u in range(n)]
    utils = [grids[u] / problem.peak[u] for u in range(n)]
    if n == 1:
        ok = utils[0] <= budget
        if not ok.any():
            return None
        masked = np.where(ok, costs[0], np.inf)
        i = int(np.argmin(masked))
        return (i,), float(masked[i])
    if n == 2:
        total = costs[0][:, None] + costs[1][None, :]
        feas = utils[0][:, None] + utils[1][None, :] <= budget
        if not feas.any():
            return None
        masked = np.where(feas, total, np.inf)
        i, j = np.unravel_index(int(np.argmin(masked)), masked.shape)
        return (int(i), int(j)), float(masked[i, j])
    if n == 3:
        pair_cost = (costs[0][:, None] + costs[1][None, :]).ravel()
        pair_util = (utils[0][:, None] + utils[1][None, :]).ravel()
        order = np.argsort(pair_util)
        pu = pair_util[order]
        pc = pair_cost[order]
        prefix_best = np.minimum.accumulate(pc)
        prefix_arg = np.zeros(pc.size, dtype=np.int64)
        run = 0
        for t in range(1, pc.size):
            if pc[t] < pc[run]:
                run = t
            prefix_arg[t] = run
        best_val = np.inf
        best = None
        L1 = grids[1].size
        for k2 in range(grids[2].size):
            room = budget - utils[2][k2]
            pos = np.searchsorted(pu, room, side="right") - 1
            if pos < 0:
                continue
            val = prefix_best[pos] + costs[2][k2]
            if val < best_val:
                flat = int(order[prefix_arg[pos]])
                best_val = float(val)
                best = (flat // L1, flat % L1, k2)
        if best is None:
            return None
        return best, best_val
    raise ValueError("grid oracle supports at most 3 users")


def grid_oracle(problem: SlotProblem, levels: int = 200, rounds: int = 3, zoom: int = 2):
    """Exhaustive grid search over per-user rate levels, with refinement.

    Returns (objective, rates) of the best feasible grid point, or None if
    no grid point fits the budget (overload).
    """
    n = problem.n_users
    lo = problem.r_min.astype(float).copy()
    hi = problem.r_max.astype(float).copy()
    result = None
    for _ in range(rounds):
        grids = [np.geomspace(lo[u], hi[u], levels) for u in range(n)]
        hit = _grid_argmin(problem, grids)
        if hit is None:
            return result
        idx, val = hit
        rates = np.array([grids[u][idx[u]] for u in range(n)])
        result = (val, rates)
        for u in range(n):
            lo[u] = grids[u][max(idx[u] - zoom, 0)]
            hi[u] = grids[u][min(idx[u] + zoom, levels - 1)]
    return result


def random_problem(rng: np.random.Generator, gamma: float = 6.0,
                   ensure_feasible: bool = True) -> SlotProblem:
    """A random 2-3-user slot problem on the standard constraint grid."""
    source = SyntheticSource()
    while True:
        n = int(rng.integers(2, 4))
        weights = rng.uniform(0.0, 1.0, size=(n, GRID_XS.size))
        weights[rng.random(weights.shape) < 0.3] = 0.0
        alphas = np.empty(n)
        betas = np.empty(n)
        for u in range(n):
            a, b = source.sample_series(int(rng.integers(0, 2**31)), 0, 1)
            alphas[u], betas[u] = a[0], b[0]
        p_avg = np.array([draw_p_avg(gamma, rng) for _ in range(n)])
        peaks = p_avg * rng.uniform(MULTIPLIER_LO, MULTIPLIER_HI, size=n)
        r_min = np.full(n, R_MIN_DEFAULT)
        r_max = np.full(n, R_MAX_DEFAULT)
        budget = float(rng.uniform(0.05, 1.0))
        if ensure_feasible and float(np.sum(r_min / peaks)) > budget:
            continue
        return SlotProblem(
            xs=GRID_XS,
            weights=weights,
            alpha=alphas,
            beta=betas,
            r_min=r_min,
            r_max=r_max,
            peak=peaks,
            sojourn=np.full(n, 200.0),
            budget=budget,
        )


@dataclass
class OracleReport:
    instances: int
    max_rel_gap: float
    failures: int
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.failures == 0


def run_oracle_suite(instances: int = 100, seed: int = 0, levels: int = 200,
                     tolerance: float = 1e-4) -> OracleReport:
    """Compare solve_slot against the grid oracle on random instances.

    The gap is relative to max(1, oracle objective); the solver may only be
    *better* than the discretized oracle, so the gap is one-sided.
    """
    rng = substream(seed, "oracle-suite")
    worst = 0.0
    failures = 0
    for _ in range(instances):
        problem = random_problem(rng)
        alloc = solve_slot(problem)
        obj = hinge_objective(problem, alloc.rates)
        oracle = grid_oracle(problem, levels=levels)
        assert oracle is not None, "feasible instance must have a grid point"
        gap = (obj - oracle[0]) / max(1.0, abs(oracle[0]))
        worst = max(worst, gap)
        if gap > tolerance:
            failures += 1
    return OracleReport(instances=instances, max_rel_gap=worst,
                        failures=failures, tolerance=tolerance)
