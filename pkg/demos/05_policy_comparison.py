"""Queue-driven adaptation vs. average-quality maximization across loads.

Sweeps the channel scaling parameter gamma and compares the fraction of
video users whose second-order-eCDF constraints are satisfied under three
setups: the queue-driven policy with auto-tuned admission control, the
same policy without admission control, and the average-quality baseline.
Uses reduced run sizes so it finishes in a couple of minutes; the CLI
scenario `admission-compare` runs the full-size version.
Run: python demos/05_policy_comparison.py
"""

from qoesim import ScenarioConfig, run

ARRIVALS = 600
SEED = 5

print("gamma   queue+AC   queue      baseline")
for gamma in (6.0, 9.0, 12.0):
    row = []
    for policy, mode in (("queue-case1", "auto"), ("queue-case1", "off"),
                         ("avg-quality", "off")):
        r = run(ScenarioConfig(gamma=gamma, policy=policy, admission_mode=mode,
                               stop_arrivals=ARRIVALS, seed=SEED))
        row.append(r.aggregates["satisfied_frac"])
    print(f"{gamma:5.0f}   {row[0]:8.3f}   {row[1]:8.3f}   {row[2]:8.3f}")

print("""
Reading the table: with ample capacity (high gamma) the queue-driven
policy protects marginal users and dominates the baseline outright.  Near
the feasibility limit (gamma=6) no rate adaptation alone can satisfy
everyone -- the queue policy equalizes deficits right at the constraint
boundary -- and admission control provides the decisive gain by shedding
just enough load.""")
