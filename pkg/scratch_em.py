import numpy as np

from rankedchoice.model import ConsumerType, Transaction, TransactionLog
from rankedchoice.master_em import (build_em_state, em_solve, em_duals,
                                    initial_columns, accept_column, column_reward,
                                    chi2_critical)

print("chi2(0.05,1) =", chi2_critical(0.05))

# two columns, each exclusively compatible with half of 10 transactions
t_a = Transaction((1,), (1,))
t_b = Transaction((2,), (2,))
log = TransactionLog(tuple([t_a] * 5 + [t_b] * 5))
cols = [ConsumerType((1,), 1), ConsumerType((2,), 1)]
state = build_em_state(log, cols)
em_solve(state)
print("x =", state.x, "loglik =", state.loglik, "iters =", state.iterations)

duals = em_duals(state)
print("mu head =", duals.mu[:3], "threshold =", duals.acceptance_threshold)

# dual consistency: weighted average of column rewards equals |T|
r = sum(float(xc) * column_reward(state, c) for c, xc in zip(state.columns, state.x))
print("sum x_c * reward_c =", r, "== |T|", state.num_transactions)

# accept_column on synthetic instance with a missing ground-truth type
log2 = TransactionLog(tuple([Transaction((1, 2), (1, 2))] * 30 + [Transaction((1, 2), ())] * 10))
cols2 = initial_columns(log2, 2, eta_max=1)  # capacity cap rules out the covering type
try:
    st2 = build_em_state(log2, cols2)
    print("unexpected: no coverage error")
except Exception as e:
    print("coverage error as expected:", type(e).__name__)

cols2 = initial_columns(log2, 2)
st2 = build_em_state(log2, cols2)
em_solve(st2)
ll_before = st2.loglik
cand = ConsumerType((1, 2), 2)
print("candidate already in columns:", cand in st2.columns)
# remove it to simulate a missing type, then re-add via accept_column
cols3 = [c for c in cols2 if c != cand]
st3 = build_em_state(log2, cols3)
em_solve(st3)
profit = column_reward(st3, cand)
print("profit =", profit, "vs threshold", st3.num_transactions)
ok, st4 = accept_column(st3, cand, profit)
print("accepted:", ok, "loglik", st3.loglik, "->", st4.loglik)
# duplicate rejection
ok2, _ = accept_column(st4, cand, column_reward(st4, cand))
print("duplicate accepted:", ok2)
