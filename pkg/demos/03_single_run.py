"""A complete simulation run, end to end.

Simulates a shared downlink at channel scale gamma=9: video users arrive
as a Poisson process, share the slot budget with high-priority traffic,
stream under the queue-driven rate adaptation policy, and are judged at
departure against the QoE constraint grid.  Reports land in ./demo_out.
Run: python demos/03_single_run.py
"""

from pathlib import Path

from qoesim import ScenarioConfig, run
from qoesim.engine import DEFAULT_GRID
from qoesim.report import write_user_report

config = ScenarioConfig(
    gamma=9.0,
    policy="queue-case1",
    admission_mode="off",
    stop_arrivals=200,   # small run for the demo; experiments use 2000
    seed=7,
)
result = run(config)

print(f"simulated {result.slots} slots, {len(result.users)} video users")
for key in ("satisfied_frac", "admitted_frac", "e_frac"):
    print(f"  {key}: {result.aggregates[key]:.3f}")
print(f"  overloaded slots: {result.overloaded_slots}")

out = Path("demo_out")
write_user_report(out / "users.csv", result, "demo", config.seed, DEFAULT_GRID.xs)
print(f"per-user report written to {out / 'users.csv'}")

worst = min((u for u in result.users), key=lambda u: (u.mean_quality or 0))
print(f"hardest user: id={worst.user_id} sojourn={worst.sojourn}"
      f" mean quality {worst.mean_quality:.1f} satisfied={worst.satisfied}")
