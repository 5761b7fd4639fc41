"""Second-order eCDF quality metric and QoE constraint evaluation.

The metric for a quality time series q(1..T) at level x is

    F2(x; q) = (1/T) * sum_t max(x - q(t), 0),

the time-averaged area by which quality falls below x.  Constraints bound
F2 at a grid of levels (when the viewer's quality expectation is unknown)
or at a single per-type level (when it is known).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

QUALITY_MIN = 0.0
QUALITY_MAX = 100.0


class QualityTrace:
    """Per-slot delivered quality for one user, on the 0-100 RDMOS scale.

    Values are clamped into [0, 100] at construction; the model in
    :mod:`qoesim.ratequality` can exceed the scale at extreme rates.
    """

    __slots__ = ("values",)

    def __init__(self, values):
        arr = np.asarray(values, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("quality trace must be a nonempty 1-D sequence")
        if not np.all(np.isfinite(arr)):
            raise ValueError("quality trace contains non-finite values")
        arr = np.clip(arr, QUALITY_MIN, QUALITY_MAX)
        arr.flags.writeable = False
        self.values = arr

    def __len__(self):
        return self.values.size

    def __repr__(self):
        return f"QualityTrace(T={len(self)}, mean={self.values.mean():.2f})"


@dataclass(frozen=True)
class CaseIConstraints:
    """Grid constraints F2(x_i) <= h_i applied to every video user.

    The grid must be strictly increasing in x and the bounds nondecreasing:
    a tighter bound at a higher level would dominate the looser one below it.
    """

    xs: np.ndarray
    hs: np.ndarray

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        hs = np.asarray(self.hs, dtype=float)
        if xs.ndim != 1 or xs.size == 0 or xs.shape != hs.shape:
            raise ValueError("constraint grid must be nonempty with matching x/h shapes")
        if np.any(np.diff(xs) <= 0):
            raise ValueError("constraint levels x_i must be strictly increasing")
        if np.any(np.diff(hs) < 0):
            raise ValueError("constraint bounds h_i must be nondecreasing in x_i")
        if np.any(hs < 0):
            raise ValueError("constraint bounds must be nonnegative")
        xs.flags.writeable = False
        hs.flags.writeable = False
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "hs", hs)

    @property
    def n_points(self):
        return self.xs.size


@dataclass(frozen=True)
class CaseIIConstraints:
    """Per-type constraints: a Type-j user must satisfy F2(g_j) <= h_j."""

    gs: np.ndarray
    hs: np.ndarray

    def __post_init__(self):
        gs = np.asarray(self.gs, dtype=float)
        hs = np.asarray(self.hs, dtype=float)
        if gs.ndim != 1 or gs.size == 0 or gs.shape != hs.shape:
            raise ValueError("type list must be nonempty with matching g/h shapes")
        if np.unique(gs).size != gs.size:
            raise ValueError("type quality expectations g_j must be unique")
        if np.any(hs < 0):
            raise ValueError("constraint bounds must be nonnegative")
        gs.flags.writeable = False
        hs.flags.writeable = False
        object.__setattr__(self, "gs", gs)
        object.__setattr__(self, "hs", hs)

    @property
    def n_types(self):
        return self.gs.size


ConstraintSet = CaseIConstraints | CaseIIConstraints


def ecdf2(trace: QualityTrace, x) -> float | np.ndarray:
    """Second-order eCDF of ``trace`` at level(s) ``x``.

    Returns ``mean(max(x - q(t), 0))`` over the trace; scalar for scalar x,
    array for an array of levels.
    """
    q = trace.values
    x = np.asarray(x, dtype=float)
    out = np.maximum(x[..., None] - q, 0.0).mean(axis=-1)
    return float(out) if out.ndim == 0 else out


def satisfies(
    trace: QualityTrace,
    constraints: ConstraintSet,
    user_type: int | None = None,
) -> tuple[bool, np.ndarray]:
    """Check the QoE constraints for one user's full trace.

    Returns ``(ok, margins)`` where ``margins[i] = h_i - F2(x_i)``; the
    constraints hold iff every margin is nonnegative.  Case-II users are
    checked only against their own type's ``(g_j, h_j)`` and must pass
    ``user_type``.
    """
    if isinstance(constraints, CaseIConstraints):
        margins = constraints.hs - ecdf2(trace, constraints.xs)
    else:
        if user_type is None:
            raise ValueError("Case-II constraints require a user type index")
        if not 0 <= user_type < constraints.n_types:
            raise ValueError(f"unknown user type {user_type}")
        g = constraints.gs[user_type]
        h = constraints.hs[user_type]
        margins = np.array([h - ecdf2(trace, g)])
    return bool(np.all(margins >= 0.0)), margins


def pooled_stats(trace: QualityTrace) -> dict[str, float]:
    """Mean, min and population variance of the trace (reporting only)."""
    q = trace.values
    return {
        "mean": float(q.mean()),
        "min": float(q.min()),
        "variance": float(q.var()),  # population variance, divide by T
    }
