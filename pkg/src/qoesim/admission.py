"""Quality-estimating threshold admission control.

A newcomer's long-run quality is predicted by solving a static version of
the per-slot allocation: sojourn-mean rate-quality parameters and rate
boxes, the expected TDMA budget (trailing mean of observed high-priority
load), effective peaks 1 / E[1/P_u], and virtual-queue weights with the
newcomer seeded at the mean of the existing users' queues.  The newcomer
is admitted iff the predicted quality strictly exceeds the threshold; the
evaluation never mutates the live policy state.
"""

from __future__ import annotations

from dataclasses import dataclass

import math

import numpy as np

from qoesim.channel import E_INV_MULTIPLIER
from qoesim.slotsolver import SlotProblem, solve_static


@dataclass(frozen=True)
class AveragedUserView:
    """Sojourn-averaged quantities the static estimate works with."""

    alpha_hat: float
    beta_hat: float
    r_min: float  # sojourn-mean minimum rate
    r_max: float  # sojourn-mean maximum rate
    expected_inv_peak: float  # E[1/P_u] = E[1/M] / p_avg
    sojourn: int
    queues: np.ndarray  # current virtual queues, (K,)


def averaged_user_view(
    alphas, betas, r_min: float, r_max: float, p_avg: float, sojourn: int, queues
) -> AveragedUserView:
    """Build the averaged view from a user's sojourn-long parameter series."""
    return AveragedUserView(
        alpha_hat=float(np.mean(alphas)),
        beta_hat=float(np.mean(betas)),
        r_min=float(r_min),
        r_max=float(r_max),
        expected_inv_peak=E_INV_MULTIPLIER / p_avg,
        sojourn=int(sojourn),
        queues=np.asarray(queues, dtype=float),
    )


@dataclass(frozen=True)
class AdmissionEstimate:
    """Outcome of one admission evaluation."""

    q_bar: float  # predicted long-run quality for the newcomer
    rates: np.ndarray  # static allocation (newcomer last)
    admitted: bool
    threshold: float
    seeded_queue: np.ndarray  # the newcomer's initial virtual queues if admitted


def estimate_and_decide(
    candidate: AveragedUserView,
    existing: list[AveragedUserView],
    levels: np.ndarray,
    threshold: float,
    expected_budget: float,
) -> AdmissionEstimate:
    """Predict the newcomer's quality and compare against the threshold.

    ``levels`` is the (K,) vector of constraint quality levels matching the
    queue layout (the grid for Case I; the user's own g_j, per row, for
    Case II -- pass per-user levels as an (n+1, K) array in that case).
    Ties reject: admission requires q_bar strictly above the threshold.
    """
    views = existing + [candidate]
    n = len(views)
    if existing:
        seeded = np.mean([v.queues for v in existing], axis=0)
    else:
        seeded = np.zeros_like(candidate.queues)
    queues = np.vstack([*(v.queues for v in existing), seeded])
    levels = np.asarray(levels, dtype=float)
    if levels.ndim == 1:
        levels = np.broadcast_to(levels, (n, levels.size)).copy()
    problem = SlotProblem(
        xs=levels,
        weights=queues / np.array([v.sojourn for v in views], dtype=float)[:, None],
        alpha=np.array([v.alpha_hat for v in views]),
        beta=np.array([v.beta_hat for v in views]),
        r_min=np.array([v.r_min for v in views]),
        r_max=np.array([v.r_max for v in views]),
        peak=np.array([1.0 / v.expected_inv_peak for v in views]),
        sojourn=np.array([v.sojourn for v in views], dtype=float),
        budget=float(expected_budget),
    )
    alloc = solve_static(problem)
    r_cand = float(alloc.rates[-1])
    if r_cand > 0:
        q_bar = candidate.alpha_hat * math.log(r_cand) + candidate.beta_hat
    else:
        q_bar = -math.inf  # expected budget exhausted by high-priority load
    return AdmissionEstimate(
        q_bar=q_bar,
        rates=alloc.rates,
        admitted=q_bar > threshold,
        threshold=float(threshold),
        seeded_queue=seeded,
    )
