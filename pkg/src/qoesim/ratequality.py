"""Log rate-quality model and per-slot parameter sources.

Delivered quality at rate r (kbps) is modelled as

    q = alpha * ln(r) + beta

with per-slot (alpha, beta) drawn from a source: either a CSV trace of
real per-video parameters or a calibrated synthetic generator.  The
synthetic default anchors quality at the rate endpoints 302 and 6412 kbps
(quality there uniform on [25, 55] and [65, 95] respectively), which keeps
quality spans on the usual RDMOS range.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from qoesim.rngtools import substream

R_MIN_DEFAULT = 302.0  # kbps
R_MAX_DEFAULT = 6412.0  # kbps


@dataclass(frozen=True)
class RateQualityParams:
    """One slot's (alpha, beta): quality = alpha * ln(rate) + beta."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive (quality increasing in rate)")


def quality(params: RateQualityParams, rate: float) -> float:
    """Model quality at ``rate`` kbps (unclamped; rate must be positive)."""
    if rate <= 0:
        raise ValueError("rate must be positive")
    return params.alpha * math.log(rate) + params.beta


def rate_for_quality(params: RateQualityParams, q: float) -> float:
    """Inverse of :func:`quality`: the rate achieving quality ``q``."""
    return math.exp((q - params.beta) / params.alpha)


def quality_curve(alpha, beta, rates):
    """Vectorized quality model; zero-or-negative rates map to quality 0."""
    rates = np.asarray(rates, dtype=float)
    pos = rates > 0
    return np.where(pos, np.asarray(alpha) * np.log(np.where(pos, rates, 1.0)) + np.asarray(beta), 0.0)


@dataclass(frozen=True)
class SyntheticSource:
    """I.i.d. per-slot (alpha, beta) anchored at two rate endpoints.

    Per slot, quality at ``r_lo`` is drawn uniform on ``q_lo_range`` and
    quality at ``r_hi`` uniform on ``q_hi_range``; (alpha, beta) are the
    unique model parameters through those two anchor points.
    """

    q_lo_range: tuple[float, float] = (25.0, 55.0)
    q_hi_range: tuple[float, float] = (65.0, 95.0)
    r_lo: float = R_MIN_DEFAULT
    r_hi: float = R_MAX_DEFAULT

    def __post_init__(self):
        if not (0 < self.r_lo < self.r_hi):
            raise ValueError("anchor rates must satisfy 0 < r_lo < r_hi")
        if not self.q_lo_range[0] <= self.q_lo_range[1]:
            raise ValueError("q_lo_range must be ordered")
        if not self.q_hi_range[0] <= self.q_hi_range[1]:
            raise ValueError("q_hi_range must be ordered")
        if not self.q_hi_range[0] > self.q_lo_range[1]:
            # alpha > 0 requires the high anchor to dominate almost surely
            raise ValueError("q_hi_range must lie strictly above q_lo_range")

    def sample_series(self, seed: int, video_id: int, n_slots: int):
        """(alphas, betas) arrays for slots 0..n_slots-1 of one video.

        Deterministic given (seed, video_id); entry s never depends on
        n_slots, so prefixes of longer series coincide.
        """
        rng = substream(seed, "rq", video_id)
        u = rng.random(size=(n_slots, 2))
        q_lo = self.q_lo_range[0] + (self.q_lo_range[1] - self.q_lo_range[0]) * u[:, 0]
        q_hi = self.q_hi_range[0] + (self.q_hi_range[1] - self.q_hi_range[0]) * u[:, 1]
        alphas = (q_hi - q_lo) / math.log(self.r_hi / self.r_lo)
        betas = q_lo - alphas * math.log(self.r_lo)
        return alphas, betas


class TraceFileSource:
    """Per-video (alpha, beta) sequences loaded from a CSV trace.

    Format: header ``video_id,slot,alpha,beta``, UTF-8, one row per slot.
    A video that outlives its trace cycles back to slot 0.
    """

    def __init__(self, path):
        series: dict[int, list[tuple[int, float, float]]] = {}
        with open(path, newline="", encoding="utf-8") as f:
            reader = csv.DictReader(f)
            required = {"video_id", "slot", "alpha", "beta"}
            if reader.fieldnames is None or not required.issubset(reader.fieldnames):
                raise ValueError(f"{path}: expected header video_id,slot,alpha,beta")
            for lineno, row in enumerate(reader, start=2):
                try:
                    vid = int(row["video_id"])
                    slot = int(row["slot"])
                    alpha = float(row["alpha"])
                    beta = float(row["beta"])
                except (TypeError, ValueError) as exc:
                    raise ValueError(f"{path}: malformed row {lineno}: {exc}") from exc
                if alpha <= 0:
                    raise ValueError(f"{path}: row {lineno}: alpha must be positive")
                series.setdefault(vid, []).append((slot, alpha, beta))
        if not series:
            raise ValueError(f"{path}: trace file has no rows")
        self._alphas: dict[int, np.ndarray] = {}
        self._betas: dict[int, np.ndarray] = {}
        for vid, rows in series.items():
            rows.sort(key=lambda r: r[0])
            self._alphas[vid] = np.array([r[1] for r in rows])
            self._betas[vid] = np.array([r[2] for r in rows])

    @property
    def video_ids(self):
        return sorted(self._alphas)

    def sample_series(self, seed: int, video_id: int, n_slots: int):
        """Stored rows for one video, cycling modulo the trace length.

        ``seed`` is accepted for interface parity with the synthetic
        source; trace playback is already deterministic.  Videos are
        assigned round-robin over the trace's video ids.
        """
        ids = self.video_ids
        vid = ids[video_id % len(ids)]
        idx = np.arange(n_slots) % self._alphas[vid].size
        return self._alphas[vid][idx].copy(), self._betas[vid][idx].copy()


RQSource = SyntheticSource | TraceFileSource


def sample_slot_params(source: RQSource, seed: int, video_id: int, slot: int) -> RateQualityParams:
    """Parameters for one (video, slot); deterministic given the seed."""
    alphas, betas = source.sample_series(seed, video_id, slot + 1)
    return RateQualityParams(alpha=float(alphas[slot]), beta=float(betas[slot]))


def write_trace_csv(path, rows) -> None:
    """Write ``(video_id, slot, alpha, beta)`` rows in the trace format."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["video_id", "slot", "alpha", "beta"])
        for vid, slot, alpha, beta in rows:
            writer.writerow([vid, slot, repr(float(alpha)), repr(float(beta))])
