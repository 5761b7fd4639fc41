"""Online rate-adaptation policies.

Two queue-driven policies (grid constraints; per-type constraints) weight
the per-slot solver by virtual-queue pressure, plus the average-quality
baseline that ignores queues entirely.  Virtual queues accumulate per-slot
constraint-violation terms

    s_i = (1/T_u) * (max(x_i - q_hat, 0) - h_i)

and evolve as v <- max(v + s, 0); they play the role of the constraint
multipliers in the per-slot objective.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from qoesim.metrics import QUALITY_MAX, QUALITY_MIN
from qoesim.slotsolver import Allocation, SlotProblem, solve_baseline, solve_slot


class PolicyKind(enum.Enum):
    QUEUE_DRIVEN_CASE_I = "queue-case1"
    QUEUE_DRIVEN_CASE_II = "queue-case2"
    AVG_QUALITY_MAX = "avg-quality"


def violation_terms(levels, bounds, q_hat, sojourn, active=True) -> np.ndarray:
    """Per-constraint violation terms s = (hinge - bound) / T.

    ``levels``/``bounds`` are (K,) or (n, K); ``q_hat`` and ``sojourn``
    scalars or (n,).  Zero outside the user's sojourn.
    """
    levels = np.asarray(levels, dtype=float)
    bounds = np.asarray(bounds, dtype=float)
    q_hat = np.asarray(q_hat, dtype=float)
    sojourn = np.asarray(sojourn, dtype=float)
    s = (np.maximum(levels - q_hat[..., None], 0.0) - bounds) / sojourn[..., None]
    return np.where(active, s, 0.0)


def update_queues(queues, s) -> np.ndarray:
    """v <- max(v + s, 0), componentwise."""
    return np.maximum(np.asarray(queues) + np.asarray(s), 0.0)


def make_ladder(r_min: float, r_max: float, levels: int = 50) -> np.ndarray:
    """Log-spaced discrete bitrate ladder between r_min and r_max."""
    return np.geomspace(r_min, r_max, levels)


def round_up_to_ladder(rates, ladder) -> np.ndarray:
    """Round each rate up to the nearest ladder level (capped at the top)."""
    idx = np.searchsorted(ladder, np.asarray(rates) - 1e-12, side="left")
    return ladder[np.minimum(idx, len(ladder) - 1)]


@dataclass
class SlotAdaptation:
    """One slot's adaptation output."""

    rates: np.ndarray
    qualities: np.ndarray  # realized, clamped to the quality scale
    new_queues: np.ndarray | None  # None for the baseline policy
    allocation: Allocation


def adapt_slot(
    policy: PolicyKind,
    queues: np.ndarray,
    levels: np.ndarray,
    bounds: np.ndarray,
    alpha: np.ndarray,
    beta: np.ndarray,
    r_min: np.ndarray,
    r_max: np.ndarray,
    peak: np.ndarray,
    sojourn: np.ndarray,
    budget: float,
    ladder: np.ndarray | None = None,
) -> SlotAdaptation:
    """Allocate one slot's rates and advance the virtual queues.

    ``queues``/``levels``/``bounds`` are (n, K) arrays over the active
    admitted users; for the per-type policy K = 1 with each user's own
    (g_j, h_j).  The baseline policy ignores and never mutates queues.
    Realized quality is the model value at the allocated rate (after
    optional ladder rounding), clamped to the 0-100 scale, and the queues
    are updated with that realized value.
    """
    queues = np.asarray(queues, dtype=float)
    problem = SlotProblem(
        xs=np.asarray(levels, dtype=float),
        weights=queues / np.asarray(sojourn, dtype=float)[:, None],
        alpha=alpha,
        beta=beta,
        r_min=r_min,
        r_max=r_max,
        peak=peak,
        sojourn=sojourn,
        budget=budget,
    )
    if policy is PolicyKind.AVG_QUALITY_MAX:
        alloc = solve_baseline(problem)
    else:
        alloc = solve_slot(problem)
    rates = alloc.rates
    if ladder is not None and not alloc.overloaded:
        rates = round_up_to_ladder(rates, ladder)
    with np.errstate(divide="ignore"):
        raw_q = np.where(rates > 0, problem.alpha * np.log(np.maximum(rates, 1e-300)) + problem.beta, 0.0)
    qualities = np.clip(raw_q, QUALITY_MIN, QUALITY_MAX)
    if policy is PolicyKind.AVG_QUALITY_MAX:
        return SlotAdaptation(rates=rates, qualities=qualities, new_queues=None, allocation=alloc)
    s = violation_terms(levels, bounds, qualities, sojourn)
    return SlotAdaptation(
        rates=rates,
        qualities=qualities,
        new_queues=update_queues(queues, s),
        allocation=alloc,
    )
