"""Per-slot convex allocator for the weighted hinge-penalty objective.

Each slot minimizes, over rate vectors r in the TDMA halfspace
``sum_u r_u / P_u <= budget`` intersected with per-user boxes,

    sum_u phi_u(r_u),   phi_u(r) = sum_i w_{u,i} * max(x_i - q_u(r), 0),

where ``q_u(r) = alpha_u * ln(r) + beta_u`` and the weights fold the
virtual-queue pressure ``v_{u,i} / T_u``.  The auxiliary quality variable
binds at the optimum, so the problem reduces to one dimension per user
coupled only through the budget.

Dual structure: for a multiplier lam >= 0 on the budget, each user's
subproblem ``min phi_u(r) + lam * r / P_u`` has a piecewise closed form
over the segments cut by the hinge breakpoints ``b_i = exp((x_i - beta)
/ alpha)``; total utilization is monotone nonincreasing in lam, so the
binding multiplier is located exactly by scanning the finitely many lam
values at which any user's rate changes shape.

Tie-break: wherever the hinge objective is flat (all hinges inactive,
or zero weights), remaining budget is spent maximizing the average-quality
objective ``sum_u (alpha_u / T_u) * ln r_u`` via the same dual scan, so a
zero-pressure slot coincides exactly with the average-quality baseline.

Overload (even minimum rates exceed the budget) is not an error: rates are
scaled down proportionally, possibly below r_min, and flagged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

UTIL_TOL = 1e-9


@dataclass
class SlotProblem:
    """One slot's solver input; row u describes one admitted user.

    ``xs``/``weights`` are (n, K): constraint quality levels and their
    nonnegative weights (v / T).  ``budget`` is the slot-time fraction left
    after high-priority traffic and may be <= 0.
    """

    xs: np.ndarray  # (n, K), strictly increasing along axis 1
    weights: np.ndarray  # (n, K), >= 0
    alpha: np.ndarray  # (n,), > 0
    beta: np.ndarray  # (n,)
    r_min: np.ndarray  # (n,), kbps
    r_max: np.ndarray  # (n,), kbps
    peak: np.ndarray  # (n,), kbps
    sojourn: np.ndarray  # (n,), T_u in slots
    budget: float

    def __post_init__(self):
        for name in ("xs", "weights", "alpha", "beta", "r_min", "r_max", "peak", "sojourn"):
            setattr(self, name, np.atleast_1d(np.asarray(getattr(self, name), dtype=float)))
        n = self.alpha.size
        if self.xs.ndim == 1:
            self.xs = np.broadcast_to(self.xs, (n, self.xs.size)).copy()
        if self.weights.shape != self.xs.shape:
            raise ValueError("weights and xs must have matching (n, K) shapes")
        if np.any(self.alpha <= 0):
            raise ValueError("alpha must be positive")
        if np.any(self.r_min <= 0) or np.any(self.r_min > self.r_max):
            raise ValueError("boxes must satisfy 0 < r_min <= r_max")
        if np.any(self.peak <= 0):
            raise ValueError("peaks must be positive")
        if not np.all(np.isfinite(self.weights)) or np.any(self.weights < 0):
            raise ValueError("weights must be finite and nonnegative")
        if np.any(np.diff(self.xs, axis=1) <= 0):
            raise ValueError("xs must be strictly increasing per user")

    @property
    def n_users(self) -> int:
        return self.alpha.size


@dataclass
class Allocation:
    """Solver output: rates per user, budget multiplier, overload flag."""

    rates: np.ndarray
    dual: float
    overloaded: bool = False


def hinge_objective(problem: SlotProblem, rates) -> float:
    """The minimized objective sum_u sum_i w * max(x_i - q_u(r_u), 0)."""
    rates = np.asarray(rates, dtype=float)
    q = problem.alpha * np.log(rates) + problem.beta
    hinge = np.maximum(problem.xs - q[:, None], 0.0)
    return float(np.sum(problem.weights * hinge))


class _Precomp:
    """Per-problem arrays reused across dual evaluations."""

    def __init__(self, problem: SlotProblem):
        p = problem
        self.n, self.K = p.xs.shape
        # hinge breakpoints in rate space, ascending with xs
        self.b = np.exp((p.xs - p.beta[:, None]) / p.alpha[:, None])
        self.lower = np.concatenate([np.zeros((self.n, 1)), self.b[:, :-1]], axis=1)
        # suffix weight sums: S[:, k] = total weight of hinges active below b_k
        self.S = np.cumsum(p.weights[:, ::-1], axis=1)[:, ::-1]
        self.aS = p.alpha[:, None] * self.S
        self.aSP = self.aS * p.peak[:, None]
        # lam thresholds at which the active segment advances (decreasing in k)
        with np.errstate(divide="ignore"):
            self.ratio = self.aSP / self.b
        self.r_min = p.r_min
        self.r_max = p.r_max
        self.inv_peak = 1.0 / p.peak
        self.rows = np.arange(self.n)


def _rates_at(pre: _Precomp, lams: np.ndarray) -> np.ndarray:
    """Per-user minimizers of phi(r) + lam * r / P for a vector of lams.

    Returns an (m, n) array, m = lams.size.  Requires lams > 0.
    """
    lams = np.asarray(lams, dtype=float).reshape(-1)
    k = np.sum(pre.ratio[None, :, :] > lams[:, None, None], axis=2)  # (m, n)
    has = k < pre.K
    kk = np.minimum(k, pre.K - 1)
    r_star = pre.aSP[pre.rows, kk] / lams[:, None]
    r = np.clip(r_star, pre.lower[pre.rows, kk], pre.b[pre.rows, kk])
    r = np.where(has, r, pre.b[:, -1])
    return np.clip(r, pre.r_min, pre.r_max)


def _zero_pressure_rates(pre: _Precomp) -> np.ndarray:
    """Limit allocation as lam -> 0+: each user's cheapest zero-penalty rate.

    A user parks at its largest positively-weighted breakpoint (clamped to
    the box); users with no weight need only r_min.
    """
    pos = pre.S > 0
    any_w = pos.any(axis=1)
    # index of the largest breakpoint whose suffix weight is positive
    j = pos.sum(axis=1) - 1  # S is a suffix sum, so positives are a prefix
    b_top = pre.b[pre.rows, np.maximum(j, 0)]
    r0 = np.where(any_w, np.clip(b_top, pre.r_min, pre.r_max), pre.r_min)
    return r0


def _solve_dual(pre: _Precomp, budget: float) -> tuple[float, np.ndarray]:
    """Exact binding multiplier via a scan of the dual's shape-change points.

    Assumes util(0+) > budget >= util(inf) = sum r_min / P.  Between
    consecutive shape-change lams, utilization is A + B / lam, so the
    crossing with the budget is solved in closed form.
    """
    with np.errstate(divide="ignore"):
        events = np.concatenate([
            pre.ratio.ravel(),
            (pre.aSP / np.maximum(pre.lower, pre.r_min[:, None])).ravel(),
            (pre.aSP / pre.r_max[:, None]).ravel(),
        ])
    events = np.unique(events[np.isfinite(events) & (events > 0)])
    rates_e = _rates_at(pre, events)
    utils = rates_e @ pre.inv_peak  # nonincreasing along events
    feas = utils <= budget
    i = int(np.argmax(feas))
    if not feas[i]:
        # numerically flat tail; fall back to the largest event
        i = len(events) - 1
    if i == 0 or utils[i] == budget:
        return float(events[i]), rates_e[i]
    lam_a, lam_b = float(events[i - 1]), float(events[i])
    lam_mid = np.sqrt(lam_a * lam_b)
    k = np.sum(pre.ratio > lam_mid, axis=1)
    has = k < pre.K
    kk = np.minimum(k, pre.K - 1)
    lo = np.maximum(pre.lower[pre.rows, kk], pre.r_min)
    hi = np.minimum(pre.b[pre.rows, kk], pre.r_max)
    r_star = pre.aSP[pre.rows, kk] / lam_mid
    interior = has & (lo < r_star) & (r_star < hi)
    # interior users contribute alpha * S_k / lam to utilization
    B = float(np.sum(pre.aS[pre.rows, kk][interior]))
    if not np.any(interior) or B <= 0.0:
        return lam_b, rates_e[i]
    fixed = _rates_at(pre, np.array([lam_mid]))[0]
    A = float(np.sum(np.where(interior, 0.0, fixed) * pre.inv_peak))
    lam = B / (budget - A)
    lam = min(max(lam, lam_a), lam_b)
    rates = _rates_at(pre, np.array([lam]))[0]
    return float(lam), rates


def _waterfill(coeff, peaks, lb, ub, budget) -> np.ndarray:
    """Maximize sum coeff_u * ln(r_u) over [lb, ub] given the budget.

    Exact dual scan for r_u(mu) = clip(coeff_u * P_u / mu, lb_u, ub_u).
    Assumes sum lb / P <= budget and coeff > 0.
    """
    coeff = np.asarray(coeff, dtype=float)
    peaks = np.asarray(peaks, dtype=float)
    lb = np.asarray(lb, dtype=float)
    ub = np.asarray(ub, dtype=float)
    inv_peak = 1.0 / peaks
    if float(ub @ inv_peak) <= budget:
        return ub.copy()
    cp = coeff * peaks
    events = np.unique(np.concatenate([cp / ub, cp / lb]))
    events = events[np.isfinite(events) & (events > 0)]
    rates_e = np.clip(cp[None, :] / events[:, None], lb, ub)
    utils = rates_e @ inv_peak
    feas = utils <= budget
    i = int(np.argmax(feas))
    if not feas[i]:
        i = len(events) - 1
    if i == 0 or utils[i] == budget:
        return rates_e[i]
    mu_a, mu_b = float(events[i - 1]), float(events[i])
    mu_mid = np.sqrt(mu_a * mu_b)
    r_star = cp / mu_mid
    interior = (lb < r_star) & (r_star < ub)
    B = float(np.sum(coeff[interior]))
    if B <= 0.0:
        return rates_e[i]
    A = float(np.sum(np.where(interior, 0.0, np.clip(r_star, lb, ub)) * inv_peak))
    mu = min(max(B / (budget - A), mu_a), mu_b)
    return np.clip(cp / mu, lb, ub)


def user_rate_given_dual(problem: SlotProblem, user: int, lam: float) -> float:
    """Minimizer of one user's phi(r) + lam * r / P over its box.

    With lam = 0 the objective is nonincreasing in r, so ties break upward
    to r_max.
    """
    if lam < 0:
        raise ValueError("dual multiplier must be nonnegative")
    if lam == 0.0:
        return float(problem.r_max[user])
    pre = _Precomp(problem)
    return float(_rates_at(pre, np.array([lam]))[0, user])


def solve_slot(problem: SlotProblem) -> Allocation:
    """Optimal slot allocation (see module docstring for the tie-break).

    Overload (sum r_min / P > budget) yields proportional down-scaling of
    the minimum rates and ``overloaded=True``.
    """
    if problem.n_users == 0:
        return Allocation(rates=np.zeros(0), dual=0.0)
    pre = _Precomp(problem)
    budget = float(problem.budget)
    min_util = float(problem.r_min @ pre.inv_peak)
    if min_util > budget:
        scale = max(budget, 0.0) / min_util
        return Allocation(rates=problem.r_min * scale, dual=0.0, overloaded=True)
    if float(problem.r_max @ pre.inv_peak) <= budget:
        return Allocation(rates=problem.r_max.copy(), dual=0.0)
    r0 = _zero_pressure_rates(pre)
    if float(r0 @ pre.inv_peak) <= budget:
        # lam* = 0: the hinge objective is already at its box-constrained
        # minimum; spend the slack on average quality.
        coeff = problem.alpha / problem.sojourn
        rates = _waterfill(coeff, problem.peak, r0, problem.r_max, budget)
        return Allocation(rates=rates, dual=0.0)
    lam, rates = _solve_dual(pre, budget)
    return Allocation(rates=rates, dual=lam)


def solve_static(problem: SlotProblem) -> Allocation:
    """Solve the admission controller's averaged problem.

    Identical algorithm to :func:`solve_slot`; the caller supplies
    sojourn-mean rate-quality parameters, mean boxes, effective peaks
    ``1 / E[1/P]`` and the expected budget.
    """
    return solve_slot(problem)


def solve_baseline(problem: SlotProblem) -> Allocation:
    """Average-quality-maximizing allocation: max sum (alpha_u/T_u) ln r_u.

    Ignores the hinge weights entirely (the comparison policy never reads
    virtual queues).  Same overload handling as :func:`solve_slot`.
    """
    if problem.n_users == 0:
        return Allocation(rates=np.zeros(0), dual=0.0)
    inv_peak = 1.0 / problem.peak
    budget = float(problem.budget)
    min_util = float(problem.r_min @ inv_peak)
    if min_util > budget:
        scale = max(budget, 0.0) / min_util
        return Allocation(rates=problem.r_min * scale, dual=0.0, overloaded=True)
    coeff = problem.alpha / problem.sojourn
    rates = _waterfill(coeff, problem.peak, problem.r_min, problem.r_max, budget)
    return Allocation(rates=rates, dual=0.0)
