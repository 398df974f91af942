"""Maximum-likelihood restricted master solved by expectation-maximization.

The master assigns probabilities to the consumer types generated so far,
maximizing the log-likelihood of the observed transactions. Internally the
log works on distinct (offer, bundle) rows weighted by their multiplicities,
which changes nothing (identical rows have identical explained probability)
but keeps the E-step small.

Duals: the per-transaction reward handed to the pricing solver is the
reciprocal of the transaction's explained probability, and a candidate type
improves the master only when its total reward exceeds the number of
transactions. Statistically insignificant candidates are rejected by a
likelihood-ratio test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np

from .model import PASSIVE, ConsumerType, Transaction, TransactionLog, is_compatible

EM_TOL = 1e-8
EM_MAX_ITER = 2000
ACCEPT_TOL = 1e-6
DEFAULT_ALPHA = 0.05


class CoverageError(RuntimeError):
    """Some transaction is compatible with no admissible column, so its
    likelihood is zero and the master is undefined."""


def chi2_critical(alpha: float, dof: int = 1) -> float:
    """Critical value of the chi-squared distribution with one degree of
    freedom, via the normal-quantile identity."""
    if dof != 1:
        raise ValueError("only one degree of freedom is supported")
    if not (0.0 < alpha < 1.0):
        raise ValueError("alpha must lie strictly between 0 and 1")
    return NormalDist().inv_cdf(1.0 - alpha / 2.0) ** 2


def initial_columns(
    log: TransactionLog,
    n: int,
    eta_max: int | None = None,
    q: int | None = None,
) -> list[ConsumerType]:
    """Seed columns: one singleton type per product, the passive type, and one
    covering type per distinct observed bundle (the bundle in ascending order
    with capacity equal to its size).

    The covering types make every transaction compatible with at least one
    column; when ``eta_max`` or ``q`` rules a covering type out, the caller
    may be left with uncovered transactions (detected downstream).
    """
    if n < 1:
        raise ValueError("the product universe must be non-empty")
    columns: list[ConsumerType] = [PASSIVE]
    columns += [ConsumerType((j,), 1) for j in range(1, n + 1)]
    seen: set[tuple[int, ...]] = set()
    for t in log.transactions:
        b = t.bundle
        if not b or b in seen:
            continue
        seen.add(b)
        if eta_max is not None and len(b) > eta_max:
            continue
        if q is not None and len(b) > q:
            continue
        cand = ConsumerType(b, len(b))
        if cand not in columns:
            columns.append(cand)
    return columns


@dataclass
class EmState:
    """Mutable master state: columns, their probabilities, the per-row
    explained probabilities, and the current log-likelihood."""

    columns: list[ConsumerType]
    row_keys: list[tuple[tuple[int, ...], tuple[int, ...]]]
    row_counts: np.ndarray          # multiplicity of each distinct row
    row_of_transaction: np.ndarray  # distinct-row index per original transaction
    compat: np.ndarray              # rows x columns boolean matrix
    x: np.ndarray                   # column probabilities, sums to 1
    y: np.ndarray                   # explained probability per distinct row
    loglik: float
    iterations: int = 0

    @property
    def num_transactions(self) -> int:
        return int(self.row_counts.sum())

    def y_per_transaction(self) -> np.ndarray:
        """Explained probability per transaction, in log order."""
        return self.y[self.row_of_transaction]


def _distinct_rows(log: TransactionLog):
    keys: list[tuple[tuple[int, ...], tuple[int, ...]]] = []
    counts: dict[tuple[tuple[int, ...], tuple[int, ...]], int] = {}
    for t in log.transactions:
        key = (t.offer, t.bundle)
        if key not in counts:
            keys.append(key)
            counts[key] = 0
        counts[key] += 1
    keys.sort()
    index = {k: i for i, k in enumerate(keys)}
    row_of = np.array([index[(t.offer, t.bundle)] for t in log.transactions],
                      dtype=np.intp)
    return keys, np.array([counts[k] for k in keys], dtype=np.float64), row_of


def _compat_column(column: ConsumerType, row_keys) -> np.ndarray:
    return np.array(
        [is_compatible(column, Transaction(offer, bundle)) for offer, bundle in row_keys],
        dtype=bool,
    )


def build_em_state(log: TransactionLog, columns: list[ConsumerType]) -> EmState:
    """Assemble the master for a column set, starting from uniform
    probabilities. Raises CoverageError when a transaction has no compatible
    column."""
    if not log.transactions:
        raise ValueError("cannot estimate from an empty log")
    if not columns:
        raise ValueError("the master needs at least one column")
    row_keys, row_counts, row_of = _distinct_rows(log)
    compat = np.column_stack([_compat_column(c, row_keys) for c in columns])
    uncovered = ~compat.any(axis=1)
    if uncovered.any():
        offer, bundle = row_keys[int(np.flatnonzero(uncovered)[0])]
        raise CoverageError(
            f"transaction (offer={offer}, bundle={bundle}) is compatible with no column; "
            "the capacity or list-length cap may be below the observed bundle size"
        )
    x = np.full(len(columns), 1.0 / len(columns))
    y = compat @ x
    loglik = float(row_counts @ np.log(y))
    return EmState(list(columns), row_keys, row_counts, row_of, compat, x, y, loglik)


def em_solve(state: EmState, tol: float = EM_TOL, max_iter: int = EM_MAX_ITER) -> EmState:
    """Ascend the log-likelihood in place until the improvement drops below
    ``tol`` or ``max_iter`` is hit.

    Each sweep is the standard latent-class update: responsibilities
    proportional to x_c over each compatible row, then column probabilities
    re-estimated as the count-weighted average responsibility.
    """
    A = state.compat
    w = state.row_counts
    total = w.sum()
    x, y, ll = state.x, state.y, state.loglik
    for _ in range(max_iter):
        state.iterations += 1
        x = x * (A.T @ (w / y)) / total
        y = A @ x
        if not (y > 0.0).all():
            raise CoverageError("a transaction lost all its probability mass")
        new_ll = float(w @ np.log(y))
        done = new_ll - ll < tol
        ll = new_ll
        if done:
            break
    state.x, state.y, state.loglik = x, y, ll
    return state


@dataclass(frozen=True)
class EmDuals:
    """Per-transaction pricing rewards (one entry per arrival, reciprocal of
    the explained probability) and the acceptance threshold."""

    mu: np.ndarray
    acceptance_threshold: float


def em_duals(state: EmState) -> EmDuals:
    return EmDuals(1.0 / state.y_per_transaction(), float(state.num_transactions))


def pricing_rewards(state: EmState) -> list[tuple[tuple[int, ...], tuple[int, ...], float]]:
    """Rewards aggregated over distinct rows (count / explained probability);
    totals per candidate type are unchanged."""
    mu = state.row_counts / state.y
    return [(offer, bundle, float(m)) for (offer, bundle), m in zip(state.row_keys, mu)]


def column_reward(state: EmState, column: ConsumerType) -> float:
    """Total reward of a column under the current duals."""
    a = _compat_column(column, state.row_keys)
    return float((state.row_counts / state.y) @ a)


def accept_column(
    state: EmState,
    candidate: ConsumerType,
    profit: float,
    alpha: float = DEFAULT_ALPHA,
    tol: float = EM_TOL,
    max_iter: int = EM_MAX_ITER,
) -> tuple[bool, EmState]:
    """Screen a priced candidate: reject when its reward does not exceed the
    transaction count, otherwise add it tentatively, re-run EM warm-started
    from the current probabilities, and keep it only if the likelihood-ratio
    statistic clears the chi-squared critical value. Returns the (possibly
    updated) state alongside the verdict."""
    threshold = float(state.num_transactions)
    if profit <= threshold + ACCEPT_TOL:
        return False, state
    if candidate in state.columns:
        return False, state
    a = _compat_column(candidate, state.row_keys)
    k = len(state.columns)
    trial = EmState(
        columns=state.columns + [candidate],
        row_keys=state.row_keys,
        row_counts=state.row_counts,
        row_of_transaction=state.row_of_transaction,
        compat=np.column_stack([state.compat, a]),
        x=np.append(state.x, 1.0 / (k + 1)) / (1.0 + 1.0 / (k + 1)),
        y=np.empty(0),
        loglik=state.loglik,
        iterations=state.iterations,
    )
    trial.y = trial.compat @ trial.x
    em_solve(trial, tol, max_iter)
    lr = 2.0 * (trial.loglik - state.loglik)
    if lr >= chi2_critical(alpha):
        return True, trial
    return False, state
