import numpy as np
from scipy.optimize import linprog

from rankedchoice.simplex import solve_lp
from rankedchoice.model import (ConsumerType, PASSIVE, Transaction, TransactionLog,
                                empirical_probabilities)
from rankedchoice.master_l1 import build_l1_state, build_and_solve, add_column, reduced_cost

rng = np.random.default_rng(7)
bad = 0
for trial in range(300):
    m = rng.integers(1, 8)
    n = rng.integers(m, m + 12)
    E = rng.normal(size=(m, n))
    z0 = np.abs(rng.normal(size=n))  # ensures feasibility
    d = E @ z0
    c = rng.normal(size=n)
    ref = linprog(c, A_eq=E, b_eq=d, bounds=(0, None), method="highs")
    try:
        mine = solve_lp(E, d, c)
        ok_status = True
    except Exception as e:
        ok_status = False
        mine = None
    if not ref.success:
        continue  # unbounded cases: skip comparison when scipy also fails
    if mine is None:
        if ref.status == 3:
            continue
        print(f"[{trial}] solver failed but scipy says {ref.status}")
        bad += 1
        continue
    if abs(mine.objective - ref.fun) > 1e-6 * max(1, abs(ref.fun)):
        print(f"[{trial}] objective {mine.objective} vs scipy {ref.fun}")
        bad += 1
    # dual feasibility and strong duality
    slack = c - mine.duals @ E
    if (slack < -1e-7).any():
        print(f"[{trial}] dual infeasible {slack.min()}")
        bad += 1
    if abs(mine.duals @ d - mine.objective) > 1e-6 * max(1, abs(mine.objective)):
        print(f"[{trial}] strong duality gap")
        bad += 1
print("LP trials done, bad =", bad)

# unbounded detection
try:
    solve_lp(np.array([[1.0, -1.0]]), np.array([1.0]), np.array([-1.0, -1.0]))
    print("unbounded NOT detected")
except Exception as e:
    print("unbounded detected:", type(e).__name__)

# tiny l1 master: market perfectly explained by type (1) eta=1
log = TransactionLog((Transaction((1,), (1,)), Transaction((1, 2), (1,))))
market = empirical_probabilities(log)
state = build_l1_state(market, [ConsumerType((1,), 1)])
build_and_solve(state)
print("perfect fit objective:", state.objective, "x:", state.x, "mu:", state.mu, "gamma:", state.gamma)

# passive-only start, then add the right column and re-solve warm
state2 = build_l1_state(market)
build_and_solve(state2)
print("passive-only objective:", state2.objective)
rc = reduced_cost(state2, ConsumerType((1,), 1))
print("reduced cost of good column:", rc)
add_column(state2, ConsumerType((1,), 1))
build_and_solve(state2)
print("after column:", state2.objective, state2.x)
print("duals bounded:", np.abs(state2.mu).max() <= 1 + 1e-7)
