"""One slot of the rate allocator, dissected.

Each slot minimizes the virtual-queue-weighted hinge penalty
sum_u sum_i w_ui * max(x_i - q_u(r_u), 0) over the TDMA budget
sum r_u / P_u <= budget and per-user rate boxes.  Users under pressure
(positive weights) are pushed toward the quality level that clears their
hinge; slack budget is spent maximizing average quality, the same rule the
comparison baseline uses all the time.
Run: python demos/02_slot_allocation.py
"""

import numpy as np

from qoesim import SlotProblem, solve_slot
from qoesim.slotsolver import hinge_objective, solve_baseline

xs = np.array([30.0, 40.0, 50.0, 60.0, 70.0])
# Two users: user 0 is under pressure at level 60 (large weight), user 1 idle.
problem = SlotProblem(
    xs=xs,
    weights=np.array([[0, 0, 0, 2.0, 0.5], [0, 0, 0, 0, 0]]),
    alpha=np.array([13.0, 13.0]),
    beta=np.array([-35.0, -35.0]),
    r_min=np.array([302.0, 302.0]),
    r_max=np.array([6412.0, 6412.0]),
    peak=np.array([9000.0, 18000.0]),
    sojourn=np.array([200.0, 200.0]),
    budget=0.25,
)

queue = solve_slot(problem)
base = solve_baseline(problem)
q = lambda r: 13.0 * np.log(r) - 35.0
print(f"budget-constrained slot (budget={problem.budget}):")
print(f"  queue-driven rates: {np.round(queue.rates, 1)}  qualities {np.round(q(queue.rates), 1)}")
print(f"  baseline     rates: {np.round(base.rates, 1)}  qualities {np.round(q(base.rates), 1)}")
print(f"  hinge penalty: queue-driven {hinge_objective(problem, queue.rates):.4f}"
      f" vs baseline {hinge_objective(problem, base.rates):.4f}")
print(f"  budget multiplier lambda = {queue.dual:.4f}")
print("-> the pressured user is pulled toward quality 60; the baseline just")
print("   splits rate in proportion to channel quality.")

# With no pressure anywhere, both policies coincide exactly.
calm = SlotProblem(
    xs=xs, weights=np.zeros((2, 5)), alpha=problem.alpha, beta=problem.beta,
    r_min=problem.r_min, r_max=problem.r_max, peak=problem.peak,
    sojourn=problem.sojourn, budget=0.25,
)
print("zero-pressure slot -> identical allocations:",
      np.allclose(solve_slot(calm).rates, solve_baseline(calm).rates))
