"""Least-absolute-error restricted master solved as a linear program.

For every distinct (offer, bundle) row of the training data the master
matches the predicted probability to the empirical one, absorbing the
mismatch in a pair of nonnegative error variables whose sum is minimized.
The error variables double as artificial variables, so the master is always
feasible; the convexity constraint (type probabilities sum to one) still
needs one genuine column, and the passive consumer is seeded for that.

LP layout: the error block comes first and type columns are appended at the
end, so generated columns never shift indices and the basis factorization
survives across column-generation iterations.

The row duals reported here are signed, which is exactly why the pricing
solver must handle signed rewards. A candidate type improves the master when
the convexity dual plus its total row reward is positive.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import (
    PASSIVE,
    ConsumerType,
    DistinctMarket,
    Transaction,
    is_compatible,
)
from .simplex import IncrementalLp, LpSolution

REDUCED_COST_TOL = 1e-6


@dataclass
class L1State:
    """Master data plus, after a solve, the optimal primal/dual information."""

    market: DistinctMarket
    columns: list[ConsumerType]
    row_keys: list[tuple[tuple[int, ...], tuple[int, ...]]] = field(default_factory=list)
    targets: np.ndarray = field(default_factory=lambda: np.empty(0))
    compat: np.ndarray = field(default_factory=lambda: np.empty((0, 0), dtype=bool))
    x: np.ndarray = field(default_factory=lambda: np.empty(0))
    eps_plus: np.ndarray = field(default_factory=lambda: np.empty(0))
    eps_minus: np.ndarray = field(default_factory=lambda: np.empty(0))
    objective: float = float("nan")
    mu: np.ndarray = field(default_factory=lambda: np.empty(0))
    gamma: float = float("nan")
    solved: bool = False
    _lp: IncrementalLp | None = None

    @property
    def num_rows(self) -> int:
        return len(self.row_keys)


def _compat_column(column: ConsumerType, row_keys) -> np.ndarray:
    return np.array(
        [is_compatible(column, Transaction(offer, bundle)) for offer, bundle in row_keys],
        dtype=bool,
    )


def _lp_column(state: L1State, compat: np.ndarray) -> np.ndarray:
    col = np.empty(state.num_rows + 1)
    col[:-1] = compat
    col[-1] = 1.0  # convexity row
    return col


def build_l1_state(market: DistinctMarket, columns: list[ConsumerType] | None = None) -> L1State:
    """Assemble the master over the market's distinct rows. The passive type
    is always included so the convexity row has a column to stand on."""
    if len(market) == 0:
        raise ValueError("the market has no rows")
    cols = list(columns) if columns else []
    if PASSIVE not in cols:
        cols.insert(0, PASSIVE)
    state = L1State(market=market, columns=cols)
    state.row_keys = market.rows()
    state.targets = np.array([market.entries[k] for k in state.row_keys])
    state.compat = np.column_stack([_compat_column(c, state.row_keys) for c in cols])
    return state


def add_column(state: L1State, column: ConsumerType) -> None:
    """Append a generated type; the factorized basis stays valid, so the next
    solve is a warm start."""
    if column in state.columns:
        raise ValueError(f"column {column} already present")
    a = _compat_column(column, state.row_keys)
    state.columns.append(column)
    state.compat = np.column_stack([state.compat, a])
    if state._lp is not None:
        state._lp.add_column(_lp_column(state, a), 0.0)
    state.solved = False


def _cold_start(state: L1State) -> IncrementalLp:
    """LP with columns [eps+ block | eps- block | type columns] and an
    explicit feasible basis: one error variable per market row (the sign
    picked against the passive column's contribution) plus the passive type
    on the convexity row."""
    m = state.num_rows
    k = len(state.columns)
    E = np.zeros((m + 1, 2 * m + k))
    E[:m, :m] = np.eye(m)
    E[:m, m:2 * m] = -np.eye(m)
    for i, c in enumerate(state.columns):
        E[:, 2 * m + i] = _lp_column(state, state.compat[:, i])
    d = np.append(state.targets, 1.0)
    c = np.concatenate([np.ones(2 * m), np.zeros(k)])
    passive = state.columns.index(PASSIVE)
    basis = []
    for r in range(m):
        if state.compat[r, passive]:
            basis.append(m + r)   # negative error carries 1 - v
        else:
            basis.append(r)       # positive error carries v
    basis.append(2 * m + passive)
    return IncrementalLp(E, d, c, basis)


def build_and_solve(state: L1State) -> L1State:
    """Solve the master to optimality, filling primal values, the objective
    (total absolute error) and the row/convexity duals."""
    if state._lp is None:
        state._lp = _cold_start(state)
    sol: LpSolution = state._lp.solve()
    m = state.num_rows
    state.eps_plus = sol.x[:m]
    state.eps_minus = sol.x[m:2 * m]
    state.x = sol.x[2 * m:]
    state.objective = sol.objective
    state.mu = sol.duals[:m]
    state.gamma = float(sol.duals[m])
    state.solved = True
    return state


def l1_duals(state: L1State) -> tuple[dict[tuple[tuple[int, ...], tuple[int, ...]], float], float]:
    """Row duals keyed by (offer, bundle), plus the convexity dual."""
    if not state.solved:
        raise ValueError("solve the master before reading duals")
    return {key: float(v) for key, v in zip(state.row_keys, state.mu)}, state.gamma


def pricing_rewards(state: L1State) -> list[tuple[tuple[int, ...], tuple[int, ...], float]]:
    """Signed rewards for the pricing solver, one per distinct row."""
    if not state.solved:
        raise ValueError("solve the master before pricing")
    return [(offer, bundle, float(v))
            for (offer, bundle), v in zip(state.row_keys, state.mu)]


def reduced_cost(state: L1State, column: ConsumerType) -> float:
    """Improvement indicator of a candidate column: positive means adding it
    can reduce the total absolute error."""
    a = _compat_column(column, state.row_keys)
    return state.gamma + float(state.mu @ a)


def is_improving(state: L1State, profit: float, tol: float = REDUCED_COST_TOL) -> bool:
    """``profit`` is the candidate's total row reward from pricing."""
    return state.gamma + profit > tol
