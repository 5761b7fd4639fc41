"""Threshold admission control and its online self-tuning.

A newcomer is admitted only if its predicted long-run quality exceeds a
threshold theta.  The threshold itself is tuned online: after every batch
of admitted-user departures, theta moves up if any of them violated their
QoE constraints and down otherwise, with a step that shrinks each time the
direction flips.  This demo runs a congested scenario (gamma=6) and prints
the threshold trajectory alongside the effect on the satisfied fraction.
Run: python demos/04_admission_tuning.py  (takes ~1 minute)
"""

from qoesim import ScenarioConfig, run

common = dict(gamma=6.0, policy="queue-case1", stop_arrivals=1000, seed=3)

no_ac = run(ScenarioConfig(admission_mode="off", **common))
auto = run(ScenarioConfig(admission_mode="auto", tuner_batch=50, **common))

print("admission off :"
      f" satisfied {no_ac.aggregates['satisfied_frac']:.3f}"
      f" (all {no_ac.aggregates['n_users']} users admitted)")
print("auto-tuned    :"
      f" satisfied {auto.aggregates['satisfied_frac']:.3f}"
      f" admitted {auto.aggregates['admitted_frac']:.3f}")
print("-> blocking a few users frees enough capacity to satisfy the rest;")
print("   blocked users count as unsatisfied, so the gain is genuine.")

print("\nthreshold trajectory (n: theta after update, y direction, m flips):")
for ev in auto.threshold_trajectory:
    print(f"  n={ev.n:2d}  theta={ev.theta:6.2f}  y={ev.y:+d}  m={ev.m}")
