"""The slotted simulation loop.

Per slot: (1) sample video/high-priority arrivals and each newcomer's
sojourn, channel constants and rate-quality series; (2) admission
decisions for new video users; (3) realize the channel (peaks and
high-priority load); (4) adapt rates, record delivered qualities, update
virtual queues; (5) process departures into satisfaction verdicts and feed
the threshold tuner.  Fully deterministic given (config, seed): every
random draw comes from a named substream of the master seed.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from qoesim import adaptation
from qoesim.adaptation import PolicyKind
from qoesim.admission import AveragedUserView, averaged_user_view, estimate_and_decide
from qoesim.channel import draw_p_avg, hp_load as hp_load_of, multiplier_series
from qoesim.metrics import CaseIConstraints, CaseIIConstraints, QualityTrace, satisfies
from qoesim.population import (
    HP_SOJOURN_FLOOR,
    SojournSpec,
    UserRecord,
    VIDEO_SOJOURN_FLOOR,
    sample_arrivals,
    sample_sojourn,
)
from qoesim.ratequality import R_MAX_DEFAULT, R_MIN_DEFAULT, SyntheticSource
from qoesim.rngtools import STREAM_HP_ARRIVALS, STREAM_VIDEO_ARRIVALS, substream
from qoesim.thresholdopt import ThresholdState, ThresholdUpdate

DEFAULT_GRID = CaseIConstraints(
    xs=np.array([30.0, 40.0, 50.0, 60.0, 70.0]),
    hs=np.array([0.7, 1.0, 3.0, 7.0, 15.0]),
)


@dataclass
class ScenarioConfig:
    """Everything one run needs; defaults follow the reference scenario."""

    gamma: float = 6.0
    policy: str = "queue-case1"  # queue-case1 | queue-case2 | avg-quality
    admission_mode: str = "off"  # off | fixed | auto
    theta: float | tuple[float, ...] = 0.0  # fixed threshold(s)
    tuner_batch: int = 100
    tuner_eps0: float = 10.0
    tuner_theta0: float = 0.0
    constraints: CaseIConstraints | CaseIIConstraints = DEFAULT_GRID
    type_probs: tuple[float, ...] = ()  # Case II type mix
    video_arrival_rate: float = 1.0 / 20
    video_mean_holding: float = 200.0
    hp_arrival_rate: float = 1.0 / 20
    hp_mean_holding: float = 200.0
    hp_rate_range: tuple[float, float] = (100.0, 300.0)
    hp_gamma: float | None = None  # decouple the HP peak-rate law if set
    r_min: float = R_MIN_DEFAULT
    r_max: float = R_MAX_DEFAULT
    rq_source: object = field(default_factory=SyntheticSource)
    ladder_rounding: bool = False
    ladder_levels: int = 50
    stop_arrivals: int = 2000
    seed: int = 0
    warmup: int = 50  # finalized video users excluded from aggregates
    hp_window: int = 1000  # slots of observed hp load for the expected budget
    hp_load_prior: float = 0.0  # expected hp load before any observation
    record_slots: bool = False
    max_slots: int | None = None  # safety valve for pathological configs
    # stop new arrivals early once every tuner component has this many
    # threshold updates (auto mode only); None = arrivals cap governs
    stop_updates: int | None = None

    def validate(self) -> None:
        PolicyKind(self.policy)
        if self.admission_mode not in ("off", "fixed", "auto"):
            raise ValueError(f"unknown admission mode {self.admission_mode!r}")
        if self.stop_arrivals <= 0:
            raise ValueError("stop_arrivals must be positive")
        if not (0 < self.r_min <= self.r_max):
            raise ValueError("rate box must satisfy 0 < r_min <= r_max")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.video_arrival_rate <= 0:
            raise ValueError("video arrival rate must be positive")
        case2 = isinstance(self.constraints, CaseIIConstraints)
        if PolicyKind(self.policy) is PolicyKind.QUEUE_DRIVEN_CASE_II and not case2:
            raise ValueError("queue-case2 policy needs Case-II constraints")
        if case2:
            if len(self.type_probs) != self.constraints.n_types:
                raise ValueError("type_probs must match the number of user types")
            if abs(sum(self.type_probs) - 1.0) > 1e-9:
                raise ValueError("type_probs must sum to 1")


@dataclass
class RunResult:
    users: list[UserRecord]
    threshold_trajectory: list[ThresholdUpdate]
    slots: int
    overloaded_slots: int
    aggregates: dict[str, float]
    slot_log: list[dict] | None = None


class _ActiveVideo:
    __slots__ = ("record", "queues", "alphas", "betas", "mults", "p_avg",
                 "levels", "bounds")

    def __init__(self, record, queues, alphas, betas, mults, p_avg, levels, bounds):
        self.record = record
        self.queues = queues
        self.alphas = alphas
        self.betas = betas
        self.mults = mults
        self.p_avg = p_avg
        self.levels = levels
        self.bounds = bounds


class _ActiveHp:
    __slots__ = ("record", "p_avg", "rate", "mults")

    def __init__(self, record, p_avg, rate, mults):
        self.record = record
        self.p_avg = p_avg
        self.rate = rate
        self.mults = mults


def verdict(record: UserRecord, constraints) -> bool:
    """Satisfaction verdict at departure; blocked users never satisfy."""
    if not record.admitted:
        return False
    trace = QualityTrace(record.quality_values)
    ok, _ = satisfies(trace, constraints, user_type=record.type_index)
    return ok


def aggregate_records(records, warmup: int = 0) -> dict[str, float]:
    """Fractions over video users in finalize order, skipping the warm-up.

    The denominator is every video user, blocked ones included (and counted
    unsatisfied); e_frac is the admitted-but-violated fraction.
    """
    scoped = records[warmup:]
    n = len(scoped)
    if n == 0:
        return {"n_users": 0, "satisfied_frac": 0.0, "admitted_frac": 0.0, "e_frac": 0.0}
    sat = sum(1 for r in scoped if r.satisfied)
    adm = sum(1 for r in scoped if r.admitted)
    bad = sum(1 for r in scoped if r.admitted and not r.satisfied)
    return {
        "n_users": n,
        "satisfied_frac": sat / n,
        "admitted_frac": adm / n,
        "e_frac": bad / n,
    }


def _constraint_rows(config, type_index):
    """(levels, bounds) row for one user, matching the queue layout."""
    c = config.constraints
    if isinstance(c, CaseIConstraints):
        return c.xs, c.hs
    g = c.gs[type_index]
    h = c.hs[type_index]
    return np.array([g]), np.array([h])


def run(config: ScenarioConfig) -> RunResult:
    config.validate()
    policy = PolicyKind(config.policy)
    case2 = isinstance(config.constraints, CaseIIConstraints)
    seed = config.seed

    video_spec = SojournSpec(config.video_arrival_rate, config.video_mean_holding,
                             floor=VIDEO_SOJOURN_FLOOR)
    hp_spec = SojournSpec(config.hp_arrival_rate, config.hp_mean_holding,
                          floor=HP_SOJOURN_FLOOR)
    video_arrival_rng = substream(seed, STREAM_VIDEO_ARRIVALS)
    hp_arrival_rng = substream(seed, STREAM_HP_ARRIVALS)

    ladder = None
    if config.ladder_rounding:
        ladder = adaptation.make_ladder(config.r_min, config.r_max, config.ladder_levels)

    tuner: ThresholdState | None = None
    if config.admission_mode == "auto":
        tuner = ThresholdState(
            n_components=config.constraints.n_types if case2 else 1,
            theta0=config.tuner_theta0,
            eps0=config.tuner_eps0,
            batch_size=config.tuner_batch,
        )

    def fixed_theta(component: int) -> float:
        if np.isscalar(config.theta):
            return float(config.theta)
        return float(config.theta[component])

    active_v: list[_ActiveVideo] = []
    active_hp: list[_ActiveHp] = []
    finalized: list[UserRecord] = []  # video users, in finalize order
    trajectory: list[ThresholdUpdate] = []
    hp_window: deque[float] = deque(maxlen=config.hp_window)
    slot_log: list[dict] | None = [] if config.record_slots else None
    overloaded_slots = 0
    next_uid = 0
    video_arrivals = 0
    hp_gamma = config.hp_gamma if config.hp_gamma is not None else config.gamma

    def finalize_video(user: UserRecord) -> None:
        user.satisfied = verdict(user, config.constraints)
        if user.quality_values:
            user.mean_quality = float(np.mean(user.quality_values))
        finalized.append(user)
        if tuner is not None and user.admitted:
            comp = user.type_index if case2 else 0
            event = tuner.observe(user.satisfied, comp)
            if event is not None:
                trajectory.append(event)

    def admit_video(rec, alphas, betas, p_avg, levels, bounds):
        """Admission decision; returns the newcomer's initial queues or None."""
        if config.admission_mode == "off":
            rec.admitted = True
            return np.zeros(levels.size)
        comp = rec.type_index if case2 else 0
        theta = tuner.threshold_for(comp) if tuner is not None else fixed_theta(comp)
        if hp_window:
            expected_budget = 1.0 - float(np.mean(hp_window))
        else:
            expected_budget = 1.0 - config.hp_load_prior
        candidate = averaged_user_view(alphas, betas, config.r_min, config.r_max,
                                       p_avg, rec.sojourn, np.zeros(levels.size))
        existing: list[AveragedUserView] = []
        level_rows = []
        for u in active_v:
            existing.append(averaged_user_view(
                u.alphas, u.betas, config.r_min, config.r_max,
                u.p_avg, u.record.sojourn, u.queues))
            level_rows.append(u.levels)
        level_rows.append(levels)
        est = estimate_and_decide(candidate, existing, np.vstack(level_rows),
                                  theta, expected_budget)
        rec.est_quality = est.q_bar if np.isfinite(est.q_bar) else None
        rec.admitted = est.admitted
        return est.seeded_queue.copy() if est.admitted else None

    t = 0
    while True:
        if config.max_slots is not None and t >= config.max_slots:
            break
        t += 1

        # -- arrivals ---------------------------------------------------
        updates_done = (
            tuner is not None
            and config.stop_updates is not None
            and bool(np.all(tuner.updates >= config.stop_updates))
        )
        arrivals_open = video_arrivals < config.stop_arrivals and not updates_done
        if arrivals_open:
            n_new = min(sample_arrivals(video_spec, video_arrival_rng),
                        config.stop_arrivals - video_arrivals)
            for _ in range(n_new):
                uid = next_uid
                next_uid += 1
                video_arrivals += 1
                sojourn = sample_sojourn(video_spec, substream(seed, "sojourn", uid))
                p_avg = draw_p_avg(config.gamma, substream(seed, "pavg", uid))
                type_index = None
                if case2:
                    type_index = int(substream(seed, "type", uid).choice(
                        len(config.type_probs), p=config.type_probs))
                alphas, betas = config.rq_source.sample_series(seed, uid, sojourn)
                mults = multiplier_series(seed, uid, sojourn)
                levels, bounds = _constraint_rows(config, type_index)
                rec = UserRecord(user_id=uid, kind="video", arrival_slot=t,
                                 sojourn=sojourn, type_index=type_index)
                queues = admit_video(rec, alphas, betas, p_avg, levels, bounds)
                if rec.admitted:
                    active_v.append(_ActiveVideo(rec, queues, alphas, betas,
                                                 mults, p_avg, levels, bounds))
                else:
                    finalize_video(rec)

        for _ in range(sample_arrivals(hp_spec, hp_arrival_rng)):
            uid = next_uid
            next_uid += 1
            sojourn = sample_sojourn(hp_spec, substream(seed, "sojourn", uid))
            p_avg = draw_p_avg(hp_gamma, substream(seed, "pavg", uid))
            rate = float(substream(seed, "hprate", uid).uniform(*config.hp_rate_range))
            mults = multiplier_series(seed, uid, sojourn)
            rec = UserRecord(user_id=uid, kind="hp", arrival_slot=t,
                             sojourn=sojourn, admitted=True)
            active_hp.append(_ActiveHp(rec, p_avg, rate, mults))

        # -- channel ----------------------------------------------------
        hp_rates = [u.rate for u in active_hp]
        hp_peaks = [u.p_avg * u.mults[t - u.record.arrival_slot] for u in active_hp]
        load = hp_load_of(hp_rates, hp_peaks)
        hp_window.append(load)
        budget = 1.0 - load

        # -- rate adaptation ---------------------------------------------
        util = load
        overloaded = False
        served = []
        if active_v:
            n = len(active_v)
            peaks = np.array([u.p_avg * u.mults[t - u.record.arrival_slot]
                              for u in active_v])
            alpha_t = np.array([u.alphas[t - u.record.arrival_slot] for u in active_v])
            beta_t = np.array([u.betas[t - u.record.arrival_slot] for u in active_v])
            out = adaptation.adapt_slot(
                policy,
                queues=np.vstack([u.queues for u in active_v]),
                levels=np.vstack([u.levels for u in active_v]),
                bounds=np.vstack([u.bounds for u in active_v]),
                alpha=alpha_t,
                beta=beta_t,
                r_min=np.full(n, config.r_min),
                r_max=np.full(n, config.r_max),
                peak=peaks,
                sojourn=np.array([u.record.sojourn for u in active_v], dtype=float),
                budget=budget,
                ladder=ladder,
            )
            overloaded = out.allocation.overloaded
            overloaded_slots += int(overloaded)
            util += float(np.sum(out.rates / peaks))
            for i, u in enumerate(active_v):
                u.record.quality_values.append(float(out.qualities[i]))
                if out.new_queues is not None:
                    u.queues = out.new_queues[i]
                served.append(u.record.user_id)

        if slot_log is not None:
            slot_log.append({
                "slot": t,
                "utilization": util,
                "hp_load": load,
                "overloaded": overloaded,
                "active_video": len(active_v),
                "active_hp": len(active_hp),
                "served": served,
            })

        # -- departures ---------------------------------------------------
        departing = [u for u in active_v if u.record.departure_slot == t]
        if departing:
            active_v = [u for u in active_v if u.record.departure_slot != t]
            for u in sorted(departing, key=lambda u: u.record.user_id):
                finalize_video(u.record)
        active_hp = [u for u in active_hp if u.record.departure_slot != t]

        if not arrivals_open and not active_v:
            break

    # both views: full-population fractions plus warm-started ones
    aggregates = dict(aggregate_records(finalized, warmup=0))
    for key, value in aggregate_records(finalized, warmup=config.warmup).items():
        aggregates[f"warm_{key}"] = value
    return RunResult(
        users=finalized,
        threshold_trajectory=trajectory,
        slots=t,
        overloaded_slots=overloaded_slots,
        aggregates=aggregates,
        slot_log=slot_log,
    )
