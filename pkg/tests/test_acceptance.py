"""Acceptance gate: nine end-to-end criteria, one test (and one printed
pass/fail line) per criterion.

Full-scale simulation runs are cached and shared across criteria, so the
whole file runs in one pytest session in roughly half an hour on one CPU.
Run with ``pytest -v tests/test_acceptance.py``; the per-criterion lines are
emitted outside pytest's capture, so they stream while the suite runs.
"""

import time

import numpy as np
import pytest

from qoesim.adaptation import PolicyKind, adapt_slot
from qoesim.engine import DEFAULT_GRID, ScenarioConfig, run
from qoesim.metrics import CaseIIConstraints, QualityTrace, ecdf2
from qoesim.oracles import random_problem, run_oracle_suite
from qoesim.rngtools import substream
from qoesim.slotsolver import solve_slot

from test_slotsolver import kkt_violations

CASE2 = CaseIIConstraints(gs=np.array([40.0, 60.0]), hs=np.array([1.0, 1.0]))
SEEDS = tuple(range(1, 11))
T_CRIT_95_DF9 = 1.8331  # one-sided t, df = 9

_RUNS: dict = {}


def sim(gamma, policy, admission="off", theta=0.0, seed=1,
        stop_updates=None, stop_arrivals=2000, case2=False):
    key = (gamma, policy, admission, theta, seed, stop_updates,
           stop_arrivals, case2)
    if key not in _RUNS:
        kw = dict(gamma=gamma, policy=policy, admission_mode=admission,
                  theta=theta, seed=seed, stop_arrivals=stop_arrivals,
                  stop_updates=stop_updates)
        if case2:
            kw["constraints"] = CASE2
            kw["type_probs"] = (0.5, 0.5)
        _RUNS[key] = run(ScenarioConfig(**kw))
    return _RUNS[key]


def paired_t(diffs):
    d = np.asarray(diffs, dtype=float)
    return float(d.mean() / (d.std(ddof=1) / np.sqrt(d.size)))


_CAPSYS = None


@pytest.fixture(autouse=True)
def _live_reporting(capsys):
    global _CAPSYS
    _CAPSYS = capsys
    yield
    _CAPSYS = None


def report(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} — {detail}"
    if _CAPSYS is not None:
        with _CAPSYS.disabled():  # emit even when pytest captures stdout
            print(line, flush=True)
    else:
        print(line, flush=True)


def test_criterion_1_solver_oracle_equivalence():
    t0 = time.time()
    rep = run_oracle_suite(instances=100, seed=0, levels=200)
    elapsed = time.time() - t0
    ok = rep.passed and elapsed < 60.0
    report(1, ok, f"max relative gap {rep.max_rel_gap:.2e} "
                  f"(tol {rep.tolerance:g}) on {rep.instances} instances, "
                  f"{elapsed:.1f}s")
    assert ok


def test_criterion_2_kkt_invariants():
    t0 = time.time()
    rng = substream(19, "kkt-acceptance")
    bad = 0
    for _ in range(10_000):
        p = random_problem(rng, ensure_feasible=False)
        if kkt_violations(p, solve_slot(p)):
            bad += 1
    elapsed = time.time() - t0
    ok = bad == 0 and elapsed < 60.0
    report(2, ok, f"{bad}/10000 instances violated KKT, {elapsed:.1f}s")
    assert ok


def test_criterion_3_metric_correctness():
    rng = np.random.default_rng(7)
    exact = True
    for _ in range(1000):
        vals = rng.uniform(0, 100, size=rng.integers(1, 60))
        x = float(rng.uniform(0, 100))
        brute = sum(max(x - q, 0.0) for q in vals) / len(vals)
        if abs(ecdf2(QualityTrace(vals), x) - brute) > 1e-12:
            exact = False
    properties = True
    grid_pts = np.linspace(0, 100, 41)
    for _ in range(1000):
        vals = rng.uniform(0, 100, size=rng.integers(1, 60))
        trace = QualityTrace(vals)
        f = ecdf2(trace, grid_pts)
        if np.any(np.diff(f) < -1e-12) or np.any(np.diff(f, 2) < -1e-12):
            properties = False
        # grid constraints <=> chord-interpolated constraints (convexity)
        xs = np.sort(rng.uniform(0, 100, size=4)) + np.arange(4) * 1e-6
        hs = np.sort(rng.uniform(0, 30, size=4))
        if np.all(ecdf2(trace, xs) <= hs + 1e-12):
            ts = np.linspace(0, 1, 9)
            for i in range(3):
                mids = (1 - ts) * xs[i] + ts * xs[i + 1]
                chord = (1 - ts) * hs[i] + ts * hs[i + 1]
                if np.any(ecdf2(trace, mids) > chord + 1e-9):
                    properties = False
    ok = exact and properties
    report(3, ok, f"double-loop exact: {exact}; "
                  f"convexity/equivalence properties: {properties}")
    assert ok


def test_criterion_4_policy_dominance_without_admission():
    details = []
    ok = True
    gap_low = None
    for gamma in (6.0, 9.0, 12.0):
        diffs = [sim(gamma, "queue-case1", seed=s).aggregates["warm_satisfied_frac"]
                 - sim(gamma, "avg-quality", seed=s).aggregates["warm_satisfied_frac"]
                 for s in SEEDS]
        t = paired_t(diffs)
        mean = float(np.mean(diffs))
        if gamma == 6.0:
            gap_low = mean
        details.append(f"gamma={gamma:g}: mean diff {mean:+.4f}, t={t:.2f}")
        if not (mean > 0 and t > T_CRIT_95_DF9):
            ok = False
    if gap_low is None or gap_low < 0.15:
        ok = False
        details.append(f"lowest-gamma gap {gap_low:+.4f} < +0.15")
    report(4, ok, "; ".join(details))
    assert ok


def test_criterion_5_admission_improves_low_gamma():
    diffs = []
    for s in SEEDS:
        with_ac = sim(6.0, "queue-case1", admission="auto", seed=s)
        without = sim(6.0, "queue-case1", seed=s)
        diffs.append(with_ac.aggregates["warm_satisfied_frac"]
                     - without.aggregates["warm_satisfied_frac"])
    t = paired_t(diffs)
    mean = float(np.mean(diffs))
    ok = mean > 0 and t > T_CRIT_95_DF9
    report(5, ok, f"gamma=6 auto-admission lift {mean:+.4f}, t={t:.2f}")
    assert ok


def test_criterion_6_threshold_convergence():
    traj = sim(6.0, "queue-case1", admission="auto", seed=1,
               stop_updates=400, stop_arrivals=10_000_000).threshold_trajectory
    thetas = [ev.theta for ev in traj]
    enough = len(thetas) >= 400
    last50 = thetas[350:400] if enough else thetas[-50:]
    conv_range = float(np.ptp(last50))
    plateau = float(np.mean(last50))

    sweep_thetas = list(range(0, 71, 10))
    e_curve = []
    for theta in sweep_thetas:
        es = [sim(6.0, "queue-case1", admission="fixed", theta=float(theta),
                  seed=s).aggregates["warm_e_frac"] for s in (1, 2, 3)]
        e_curve.append(float(np.mean(es)))
    nonincreasing = all(b <= a + 1e-9 for a, b in zip(e_curve, e_curve[1:]))
    zeros = [t for t, e in zip(sweep_thetas, e_curve) if e == 0.0]
    hits_zero = bool(zeros)
    within_eps0 = hits_zero and abs(plateau - zeros[0]) <= 10.0

    ok = enough and conv_range < 5.0 and nonincreasing and within_eps0
    report(6, ok,
           f"last-50 range {conv_range:.2f} (<5), plateau {plateau:.1f}; "
           f"e(theta) {['%.4f' % e for e in e_curve]} nonincreasing={nonincreasing}; "
           f"smallest zero theta {zeros[0] if zeros else 'none'}, "
           f"|plateau - theta0| <= eps0={within_eps0}")
    assert ok


def test_criterion_7_two_type_dominance_and_convergence():
    traj = sim(6.0, "queue-case2", admission="auto", seed=1, case2=True,
               stop_updates=200, stop_arrivals=10_000_000).threshold_trajectory
    per = {0: [], 1: []}
    for ev in traj:
        per[ev.component].append(ev.theta)
    ranges = {c: float(np.ptp(th[-50:])) for c, th in per.items()}
    converged = all(len(th) >= 50 for th in per.values()) \
        and all(r < 5.0 for r in ranges.values())

    details = [f"component ranges {ranges[0]:.2f}/{ranges[1]:.2f}"]
    dominance = True
    for gamma in (6.0, 12.0):
        diffs = [sim(gamma, "queue-case2", admission="auto", seed=s,
                     case2=True).aggregates["warm_satisfied_frac"]
                 - sim(gamma, "avg-quality", seed=s,
                       case2=True).aggregates["warm_satisfied_frac"]
                 for s in SEEDS]
        t = paired_t(diffs)
        mean = float(np.mean(diffs))
        details.append(f"gamma={gamma:g}: mean diff {mean:+.4f}, t={t:.2f}")
        if not (mean > 0 and t > T_CRIT_95_DF9):
            dominance = False
    ok = converged and dominance
    report(7, ok, "; ".join(details))
    assert ok


def test_criterion_8_determinism_and_accounting():
    cfg = dict(gamma=6.0, policy="queue-case1", admission_mode="fixed",
               theta=50.0, stop_arrivals=200, seed=4)
    a, b = run(ScenarioConfig(**cfg)), run(ScenarioConfig(**cfg))
    identical = (a.aggregates == b.aggregates and a.slots == b.slots and
                 all(ua.user_id == ub.user_id and ua.satisfied == ub.satisfied
                     and ua.quality_values == ub.quality_values
                     for ua, ub in zip(a.users, b.users)))
    accounting = True
    checked = 0
    for result in list(_RUNS.values()) + [a]:
        n = len(result.users)
        admitted = sum(1 for u in result.users if u.admitted)
        blocked = sum(1 for u in result.users if not u.admitted)
        if admitted + blocked != n:
            accounting = False
        if any(u.satisfied for u in result.users if not u.admitted):
            accounting = False
        agg = result.aggregates
        if agg["satisfied_frac"] > agg["admitted_frac"] + 1e-12:
            accounting = False
        checked += 1
    ok = identical and accounting
    report(8, ok, f"bit-identical replay: {identical}; "
                  f"accounting invariants on {checked} runs: {accounting}")
    assert ok


def test_criterion_9_queue_stability():
    # Analytically feasible stationary scenario: two users, constant
    # rate-quality map q = 13 ln r - 35, average peak 2400 with iid
    # U[0.5, 1.5] multipliers, full budget.  Splitting the peak evenly gives
    # q in [48.2, 62.5] (mean ~56.6), which meets every grid bound with
    # slack, so the virtual queues must stay bounded.
    T = 100_000
    n = 2
    rng = substream(42, "stability")
    mults = rng.uniform(0.5, 1.5, size=(T, n))
    xs, hs = DEFAULT_GRID.xs, DEFAULT_GRID.hs
    kw = dict(levels=np.tile(xs, (n, 1)), bounds=np.tile(hs, (n, 1)),
              alpha=np.full(n, 13.0), beta=np.full(n, -35.0),
              r_min=np.full(n, 302.0), r_max=np.full(n, 6412.0),
              sojourn=np.full(n, float(T)), budget=1.0)
    queues = np.zeros((n, xs.size))
    q_at_1000 = None
    q_max = 0.0
    for t in range(T):
        out = adapt_slot(PolicyKind.QUEUE_DRIVEN_CASE_I, queues,
                         peak=2400.0 * mults[t], **kw)
        queues = out.new_queues
        total = float(queues.sum())
        q_max = max(q_max, total)
        if t + 1 == 1000:
            q_at_1000 = total
    ok = q_at_1000 is not None and q_at_1000 > 0 and q_max < 10.0 * q_at_1000
    report(9, ok, f"queue mass at slot 1000: {q_at_1000:.6f}, "
                  f"max over {T} slots: {q_max:.6f} "
                  f"(ratio {q_max / q_at_1000 if q_at_1000 else float('inf'):.2f} < 10)")
    assert ok
