"""Simplex LP solver contract and the least-absolute-error master."""

import random

import numpy as np
import pytest
from scipy.optimize import linprog

from rankedchoice.master_l1 import (
    add_column,
    build_and_solve,
    build_l1_state,
    is_improving,
    l1_duals,
    pricing_rewards,
    reduced_cost,
)
from rankedchoice.model import (
    PASSIVE,
    ConsumerType,
    Transaction,
    TransactionLog,
    empirical_probabilities,
)
from rankedchoice.oracle import OracleConfig
from rankedchoice.simplex import IncrementalLp, UnboundedError, solve_lp


def T(offer, bundle=()):
    return Transaction(tuple(offer), tuple(bundle))


class TestSimplexContract:
    def test_against_external_solver(self):
        rng = np.random.default_rng(42)
        for _ in range(120):
            m = int(rng.integers(1, 7))
            ncols = int(rng.integers(m, m + 10))
            E = rng.normal(size=(m, ncols))
            d = E @ np.abs(rng.normal(size=ncols))  # feasible by construction
            c = rng.normal(size=ncols)
            ref = linprog(c, A_eq=E, b_eq=d, bounds=(0, None), method="highs")
            try:
                sol = solve_lp(E, d, c)
            except UnboundedError:
                assert ref.status == 3
                continue
            assert ref.success
            assert sol.objective == pytest.approx(ref.fun, abs=1e-6, rel=1e-6)
            # dual feasibility and strong duality
            assert (c - sol.duals @ E >= -1e-7).all()
            assert sol.duals @ d == pytest.approx(sol.objective, abs=1e-6, rel=1e-6)

    def test_unbounded_detected(self):
        with pytest.raises(UnboundedError):
            solve_lp(np.array([[1.0, -1.0]]), np.array([1.0]),
                     np.array([-1.0, -1.0]))

    def test_incremental_matches_cold(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            m = 5
            E = np.hstack([np.eye(m), rng.normal(size=(m, 4))])
            d = np.abs(rng.normal(size=m)) + 0.1
            c = np.concatenate([np.ones(m), np.abs(rng.normal(size=4))])
            lp = IncrementalLp(E, d, c, basis=list(range(m)))
            lp.solve()
            extra = np.abs(rng.normal(size=m)) + 0.05
            j = lp.add_column(extra, 0.1)
            assert j == E.shape[1]
            warm = lp.solve()
            cold = solve_lp(np.hstack([E, extra[:, None]]), d, np.append(c, 0.1))
            assert warm.objective == pytest.approx(cold.objective, abs=1e-7)


class TestL1Master:
    def test_perfect_fit(self):
        market = empirical_probabilities(TransactionLog((T({1}, {1}),)))
        state = build_l1_state(market, [ConsumerType((1,), 1)])
        build_and_solve(state)
        assert state.objective == pytest.approx(0.0, abs=1e-9)
        assert state.x[state.columns.index(ConsumerType((1,), 1))] == pytest.approx(1.0)

    def test_passive_only_absorbs_two_rows(self):
        log = TransactionLog((T({1}, {1}), T({1})))
        market = empirical_probabilities(log)
        state = build_l1_state(market)
        build_and_solve(state)
        # passive explains the no-purchase row (0.5 predicted vs 1 with eps-)
        # and misses the purchase row entirely
        assert state.objective == pytest.approx(1.0, abs=1e-9)
        assert state.x[state.columns.index(PASSIVE)] == pytest.approx(1.0)

    def test_included_columns_have_nonpositive_reduced_cost(self):
        rng = random.Random(3)
        log = TransactionLog(tuple(
            T(offer := rng.sample(range(1, 5), rng.randint(1, 4)),
              rng.sample(offer, rng.randint(0, 1)))
            for _ in range(30)
        ))
        state = build_l1_state(empirical_probabilities(log))
        build_and_solve(state)
        add_column(state, ConsumerType((1,), 1))
        add_column(state, ConsumerType((3, 2), 1))
        build_and_solve(state)
        for c in state.columns:
            assert reduced_cost(state, c) <= 1e-7

    def test_duals_bounded_by_one(self):
        rng = random.Random(5)
        for _ in range(15):
            log = TransactionLog(tuple(
                T(offer := rng.sample(range(1, 5), rng.randint(1, 4)),
                  rng.sample(offer, rng.randint(0, 1)))
                for _ in range(25)
            ))
            state = build_l1_state(empirical_probabilities(log))
            build_and_solve(state)
            assert np.abs(state.mu).max() <= 1.0 + 1e-7

    def test_perfect_fit_certified_by_enumeration(self):
        # a market exactly generated by one type: once column generation
        # stops, no candidate anywhere has positive reduced cost
        from itertools import permutations

        from rankedchoice.driver import CgConfig, run_estimation

        log = TransactionLog(tuple([T({1, 2}, {1})] * 4 + [T({2, 3}, {2})] * 4))
        model, report = run_estimation(log, CgConfig(master="l1"), n=3)
        assert report.termination_reason == "converged"
        assert report.final_objective == pytest.approx(0.0, abs=1e-9)
        state = build_l1_state(empirical_probabilities(log), list(model.types))
        build_and_solve(state)
        for r in range(0, 4):
            for sigma in permutations(range(1, 4), r):
                for eta in (1, 2, 3):
                    cand = ConsumerType(sigma, eta) if sigma else PASSIVE
                    assert reduced_cost(state, cand) <= 1e-6

    def test_objective_non_increasing_as_columns_arrive(self):
        rng = random.Random(9)
        log = TransactionLog(tuple(
            T(offer := rng.sample(range(1, 5), rng.randint(2, 4)),
              rng.sample(offer, rng.randint(0, 2)))
            for _ in range(40)
        ))
        state = build_l1_state(empirical_probabilities(log))
        build_and_solve(state)
        prev = state.objective
        for cand in (ConsumerType((1,), 1), ConsumerType((2, 1), 2),
                     ConsumerType((4, 3), 1), ConsumerType((3,), 1)):
            add_column(state, cand)
            build_and_solve(state)
            assert state.objective <= prev + 1e-9
            prev = state.objective

    def test_duals_and_rewards_align(self):
        log = TransactionLog((T({1, 2}, {1}), T({1, 2}), T({2}, {2})))
        state = build_l1_state(empirical_probabilities(log))
        build_and_solve(state)
        duals, gamma = l1_duals(state)
        rewards = {(o, b): mu for o, b, mu in pricing_rewards(state)}
        assert duals == rewards
        cand = ConsumerType((1,), 1)
        profit = sum(mu for (o, b), mu in rewards.items()
                     if frozenset(b) == frozenset({1}) & set(o)
                     or (not b and 1 not in o))
        assert is_improving(state, profit) == (gamma + profit > 1e-6)

    def test_empty_market_rejected(self):
        with pytest.raises(ValueError):
            build_l1_state(empirical_probabilities(TransactionLog(())))
