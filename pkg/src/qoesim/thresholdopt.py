"""Sign-driven stochastic approximation of the admission threshold.

Each component j batches the satisfaction verdicts of L admitted users of
its scope (all users for the scalar case, Type-j users for the vector
case).  A full batch moves theta_j by +eps if any user violated its QoE
constraints and by -eps otherwise, with eps = eps0 / m_j where m_j counts
direction changes of that component.  The step therefore stays large while
the threshold is far from the plateau and shrinks once it oscillates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class ThresholdUpdate:
    """One emitted update event, for the trajectory report."""

    n: int  # update index (1-based, per component)
    component: int
    theta: float  # value after the update
    y: int
    m: int


@dataclass
class ThresholdState:
    """Mutable tuner state; one component per user type (one if scalar)."""

    n_components: int = 1
    theta0: float = 0.0
    eps0: float = 10.0
    batch_size: int = 100
    theta: np.ndarray = field(init=False)
    m: np.ndarray = field(init=False)
    last_y: np.ndarray = field(init=False)  # 0 until the first update
    updates: np.ndarray = field(init=False)
    _count: np.ndarray = field(init=False)
    _violated: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch size must be >= 1")
        self.theta = np.full(self.n_components, float(self.theta0))
        self.m = np.ones(self.n_components, dtype=int)
        self.last_y = np.zeros(self.n_components, dtype=int)
        self.updates = np.zeros(self.n_components, dtype=int)
        self._count = np.zeros(self.n_components, dtype=int)
        self._violated = np.zeros(self.n_components, dtype=bool)

    def threshold_for(self, component: int = 0) -> float:
        return float(self.theta[component])

    def observe(self, satisfied: bool, component: int = 0) -> ThresholdUpdate | None:
        """Record one admitted user's departure verdict.

        Returns the update event when this verdict completes the
        component's batch, else None.
        """
        self._count[component] += 1
        if not satisfied:
            self._violated[component] = True
        if self._count[component] < self.batch_size:
            return None
        y = 1 if self._violated[component] else -1
        self._count[component] = 0
        self._violated[component] = False
        return self.update(y, component)

    def update(self, y: int, component: int = 0) -> ThresholdUpdate:
        """Apply one direction y in {-1, +1} to a component."""
        if y not in (-1, 1):
            raise ValueError("update direction must be -1 or +1")
        # the first update has no previous direction to differ from
        if self.last_y[component] != 0 and y != self.last_y[component]:
            self.m[component] += 1
        eps = self.eps0 / self.m[component]
        self.theta[component] = max(self.theta[component] + eps * y, 0.0)
        self.last_y[component] = y
        self.updates[component] += 1
        return ThresholdUpdate(
            n=int(self.updates[component]),
            component=component,
            theta=float(self.theta[component]),
            y=y,
            m=int(self.m[component]),
        )
