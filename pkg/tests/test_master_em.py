"""EM master: initialization coverage, likelihood ascent, duals, and the
column acceptance test."""

import random

import numpy as np
import pytest

from rankedchoice.master_em import (
    CoverageError,
    accept_column,
    build_em_state,
    chi2_critical,
    column_reward,
    em_duals,
    em_solve,
    initial_columns,
    pricing_rewards,
)
from rankedchoice.model import (
    PASSIVE,
    ConsumerType,
    Transaction,
    TransactionLog,
    purchase_outcome,
)


def T(offer, bundle=()):
    return Transaction(tuple(offer), tuple(bundle))


def random_log(rng, n=4, t=30, eta=2):
    rows = []
    for _ in range(t):
        size = rng.randint(1, n)
        offer = rng.sample(range(1, n + 1), size)
        bundle = rng.sample(offer, rng.randint(0, min(eta, size)))
        rows.append(T(offer, bundle))
    return TransactionLog(tuple(rows))


class TestInitialColumns:
    def test_singletons_plus_passive(self):
        log = TransactionLog((T({1, 2}, {1}), T({1, 3}, {3})))
        cols = initial_columns(log, 3)
        assert PASSIVE in cols
        for j in (1, 2, 3):
            assert ConsumerType((j,), 1) in cols
        assert len(cols) == 4  # observed bundles are singletons already

    def test_covering_type_for_multi_bundle(self):
        log = TransactionLog((T({2, 5, 7}, {2, 5}),))
        cols = initial_columns(log, 7)
        cover = ConsumerType((2, 5), 2)
        assert cover in cols
        assert all(
            any(purchase_outcome(c, t.offer) == frozenset(t.bundle) for c in cols)
            for t in log.transactions
        )

    def test_empty_universe_rejected(self):
        with pytest.raises(ValueError):
            initial_columns(TransactionLog(()), 0)

    def test_capacity_cap_blocks_coverage(self):
        log = TransactionLog((T({1, 2}, {1, 2}),))
        cols = initial_columns(log, 2, eta_max=1)
        with pytest.raises(CoverageError):
            build_em_state(log, cols)


class TestEmSolve:
    def test_single_column_degenerate(self):
        log = TransactionLog((T({1}, {1}), T({1, 2}, {1})))
        state = build_em_state(log, [ConsumerType((1,), 1)])
        em_solve(state)
        assert state.x[0] == pytest.approx(1.0)
        assert state.loglik == pytest.approx(0.0)

    def test_disjoint_support_splits_evenly(self):
        log = TransactionLog(tuple([T({1}, {1})] * 5 + [T({2}, {2})] * 5))
        state = build_em_state(log, [ConsumerType((1,), 1), ConsumerType((2,), 1)])
        em_solve(state)
        assert state.x == pytest.approx([0.5, 0.5])

    def test_loglik_monotone_and_simplex_kept(self):
        rng = random.Random(3)
        for _ in range(40):
            log = random_log(rng)
            state = build_em_state(log, initial_columns(log, 4))
            trace = [state.loglik]
            for _ in range(25):
                em_solve(state, tol=-1.0, max_iter=1)
                trace.append(state.loglik)
                assert state.x.sum() == pytest.approx(1.0, abs=1e-9)
                assert (state.x >= -1e-15).all()
            assert all(b >= a - 1e-12 for a, b in zip(trace, trace[1:]))


class TestDuals:
    def test_reciprocal(self):
        log = TransactionLog((T({1}, {1}), T({1, 2}, {1}), T({1, 2}, {1})))
        state = build_em_state(log, initial_columns(log, 2))
        em_solve(state)
        duals = em_duals(state)
        assert duals.mu == pytest.approx(1.0 / state.y_per_transaction())
        assert duals.acceptance_threshold == 3

    def test_aggregated_rewards_match_per_transaction_totals(self):
        rng = random.Random(7)
        log = random_log(rng, n=3, t=25)
        state = build_em_state(log, initial_columns(log, 3))
        em_solve(state)
        candidate = ConsumerType((2, 1), 1)
        total = sum(
            1.0 / y
            for t, y in zip(log.transactions, state.y_per_transaction())
            if purchase_outcome(candidate, t.offer) == frozenset(t.bundle)
        )
        assert column_reward(state, candidate) == pytest.approx(total)
        agg = sum(mu for offer, bundle, mu in pricing_rewards(state)
                  if purchase_outcome(candidate, offer) == frozenset(bundle))
        assert agg == pytest.approx(total)

    def test_average_column_reward_equals_threshold(self):
        rng = random.Random(11)
        for _ in range(20):
            log = random_log(rng)
            state = build_em_state(log, initial_columns(log, 4))
            em_solve(state)
            avg = sum(
                float(x) * column_reward(state, c)
                for c, x in zip(state.columns, state.x)
            )
            assert avg == pytest.approx(state.num_transactions, abs=1e-6)


class TestAcceptColumn:
    def test_threshold_boundary_rejected_without_resolve(self):
        log = TransactionLog((T({1}, {1}),))
        state = build_em_state(log, initial_columns(log, 1))
        em_solve(state)
        ok, out = accept_column(state, ConsumerType((1,), 1), float(len(log)))
        assert not ok and out is state

    def test_duplicate_rejected(self):
        log = TransactionLog((T({1}, {1}),))
        state = build_em_state(log, initial_columns(log, 1))
        em_solve(state)
        ok, _ = accept_column(state, ConsumerType((1,), 1), 100.0)
        assert not ok

    def test_missing_truth_type_accepted(self):
        rng = random.Random(13)
        truth = ConsumerType((2, 1, 3), 2)
        rows = []
        for _ in range(150):
            size = rng.randint(1, 3)
            offer = tuple(sorted(rng.sample([1, 2, 3], size)))
            bundle = (tuple(sorted(purchase_outcome(truth, offer)))
                      if rng.random() < 0.7 else ())
            rows.append(T(offer, bundle))
        log = TransactionLog(tuple(rows))
        state = build_em_state(log, initial_columns(log, 3))
        em_solve(state)
        profit = column_reward(state, truth)
        assert profit > state.num_transactions
        before = state.loglik
        ok, state = accept_column(state, truth, profit)
        assert ok
        assert 2 * (state.loglik - before) >= chi2_critical(0.05)


def test_chi2_reference_value():
    assert chi2_critical(0.05) == pytest.approx(3.841, abs=5e-4)
