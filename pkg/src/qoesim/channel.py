"""TDMA rate region, peak-rate processes, and high-priority background load.

Peak transmission rate of a user is the product of a per-user constant
``p_avg`` (uniform on [1250*gamma, 3750*gamma] kbps) and an i.i.d.
per-slot multiplier uniform on [0.5, 1.5].  A slot is feasible for a video
rate vector r iff

    sum_u r_u / P_u(t) + hp_load(t) <= 1,

where hp_load is the slot-time fraction consumed by high-priority users.
High-priority demand may exceed capacity; the channel reports budget <= 0
honestly and the solver handles the overload.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from qoesim.rngtools import substream

DELTA_T = 1.0  # slot duration, seconds

MULTIPLIER_LO = 0.5
MULTIPLIER_HI = 1.5
# E[1/M] for M ~ Uniform[0.5, 1.5]; used by admission's averaged rate region.
E_INV_MULTIPLIER = math.log(MULTIPLIER_HI / MULTIPLIER_LO)

P_AVG_LO_PER_GAMMA = 1250.0  # kbps
P_AVG_HI_PER_GAMMA = 3750.0  # kbps


@dataclass(frozen=True)
class PeakRateProcess:
    """Per-user peak-rate law: realized peak = p_avg * Uniform[0.5, 1.5]."""

    p_avg: float
    gamma: float

    def __post_init__(self):
        lo = P_AVG_LO_PER_GAMMA * self.gamma
        hi = P_AVG_HI_PER_GAMMA * self.gamma
        if not lo <= self.p_avg <= hi:
            raise ValueError(f"p_avg {self.p_avg} outside [{lo}, {hi}] for gamma={self.gamma}")

    @property
    def expected_inverse_peak(self) -> float:
        return E_INV_MULTIPLIER / self.p_avg


def draw_p_avg(gamma: float, rng: np.random.Generator) -> float:
    return float(rng.uniform(P_AVG_LO_PER_GAMMA * gamma, P_AVG_HI_PER_GAMMA * gamma))


def multiplier_series(seed: int, user_id: int, n_slots: int) -> np.ndarray:
    """Per-slot peak multipliers for one user; prefix-stable in n_slots."""
    rng = substream(seed, "peak", user_id)
    return rng.uniform(MULTIPLIER_LO, MULTIPLIER_HI, size=n_slots)


@dataclass(frozen=True)
class SlotChannel:
    """One slot's realized channel: per-user peaks and high-priority load."""

    peaks: dict[int, float]
    hp_load: float

    @property
    def budget(self) -> float:
        # May be <= 0 under high-priority overload.
        return 1.0 - self.hp_load


def hp_load(hp_rates, hp_peaks) -> float:
    """Slot-time fraction consumed by high-priority users: sum R_u / P_u."""
    rates = np.asarray(hp_rates, dtype=float)
    peaks = np.asarray(hp_peaks, dtype=float)
    if rates.size == 0:
        return 0.0
    if np.any(peaks <= 0):
        raise ValueError("peak rates must be positive")
    return float(np.sum(rates / peaks))


def utilization(rates: dict[int, float], slot: SlotChannel) -> float:
    """Total slot-time share of a video rate vector; feasible iff <= 1."""
    total = slot.hp_load
    for uid, r in rates.items():
        if uid not in slot.peaks:
            raise KeyError(f"no peak rate for user {uid} in this slot")
        total += r / slot.peaks[uid]
    return total


def sample_slot(active_users, multipliers, hp_users=(), hp_multipliers=()) -> SlotChannel:
    """Realize one slot from per-user processes and this slot's multipliers.

    ``active_users`` / ``hp_users`` are (user_id, PeakRateProcess) pairs and
    ``multipliers`` / ``hp_multipliers`` the matching per-slot draws; hp users
    additionally carry their constant rate as a third tuple element.
    """
    peaks = {
        uid: proc.p_avg * m for (uid, proc), m in zip(active_users, multipliers)
    }
    hp_r, hp_p = [], []
    for (uid, proc, rate), m in zip(hp_users, hp_multipliers):
        hp_r.append(rate)
        hp_p.append(proc.p_avg * m)
    return SlotChannel(peaks=peaks, hp_load=hp_load(hp_r, hp_p))
