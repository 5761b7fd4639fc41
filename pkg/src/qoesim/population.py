"""Arrival and departure processes for video and high-priority users."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

VIDEO_SOJOURN_FLOOR = 40  # slots; video streams are at least 40 s long
HP_SOJOURN_FLOOR = 1


@dataclass(frozen=True)
class SojournSpec:
    """Poisson arrivals at ``arrival_rate`` users/s, exponential holding."""

    arrival_rate: float  # users per second
    mean_holding: float  # seconds
    floor: int = 1  # slots

    def __post_init__(self):
        if self.arrival_rate < 0:
            raise ValueError("arrival rate must be nonnegative")
        if self.mean_holding <= 0:
            raise ValueError("mean holding time must be positive")
        if self.floor < 0:
            raise ValueError("sojourn floor must be nonnegative")


def sample_arrivals(spec: SojournSpec, rng: np.random.Generator, delta_t: float = 1.0) -> int:
    """Number of arrivals in one slot: Poisson(rate * delta_t)."""
    lam = spec.arrival_rate * delta_t
    if lam == 0:
        return 0
    return int(rng.poisson(lam))


def sample_sojourn(spec: SojournSpec, rng: np.random.Generator) -> int:
    """Sojourn in whole slots: max(ceil(Exp(mean_holding)), floor).

    Ceiling discretization keeps the floor exact in slot units.
    """
    t = rng.exponential(spec.mean_holding)
    return max(int(math.ceil(t)), spec.floor, 1)


@dataclass
class UserRecord:
    """One user's lifecycle, kept for every arrival (blocked users too)."""

    user_id: int
    kind: str  # "video" | "hp"
    arrival_slot: int
    sojourn: int
    type_index: int | None = None
    admitted: bool = False
    est_quality: float | None = None  # admission estimate, if evaluated
    quality_values: list[float] = field(default_factory=list)
    satisfied: bool | None = None
    mean_quality: float | None = None

    @property
    def departure_slot(self) -> int:
        return self.arrival_slot + self.sojourn - 1
