"""Labeling solver: extension arithmetic, dominance, accelerations, and
equivalence with the enumeration oracle on randomized instances."""

import random

import numpy as np
import pytest

from rankedchoice.model import PASSIVE, ConsumerType
from rankedchoice.oracle import OracleConfig, brute_force_glop
from rankedchoice.pricing import (
    PricingInstance,
    completion_bound,
    completion_bound_prune,
    dominates,
    extend,
    extend_all,
    init_labels,
    profit_of_type,
    solve_pricing,
    solve_pricing_heuristic,
    unreachable_update,
)


def make_instance(rows, n=None, **kw):
    if n is None:
        n = max(max(offer) for offer, _, _ in rows)
    return PricingInstance(n, rows, **kw)


def random_instance(rng, n_max=7, t_max=30, eta_cap=3, q_choices=(2, None)):
    n = rng.randint(2, n_max)
    rows = []
    for _ in range(rng.randint(1, t_max)):
        size = rng.randint(1, n)
        offer = rng.sample(range(1, n + 1), size)
        bundle = rng.sample(offer, rng.randint(0, size))
        rows.append((offer, bundle, rng.uniform(-1, 1)))
    q = rng.choice(q_choices)
    return PricingInstance(n, rows, eta_max=rng.randint(1, eta_cap), q=q)


class TestInstance:
    def test_zero_rewards_dropped(self):
        inst = make_instance([({1}, {1}, 0.0), ({1}, (), 0.5)])
        assert inst.num_rows == 1

    def test_serialization_round_trip(self):
        inst = make_instance([({1, 2}, {1}, 0.5), ({1, 3}, (), -0.25)],
                             n=4, eta_max=2, q=2)
        again = PricingInstance.from_dict(inst.to_dict())
        assert again.to_dict() == inst.to_dict()

    def test_bundle_outside_offer_rejected(self):
        with pytest.raises(ValueError):
            make_instance([({1}, {2}, 1.0)], n=2)


class TestInitLabels:
    def test_root_profit_and_status(self):
        inst = make_instance(
            [({1}, (), 0.5), ({1, 2, 3}, {1, 2, 3}, 1.0)], eta_max=3)
        roots = {r.eta: r for r in init_labels(inst)}
        assert roots[2].profit == pytest.approx(0.5)
        assert list(roots[2].status) == [0, -1]
        assert roots[3].profit == pytest.approx(0.5)
        assert list(roots[3].status) == [0, 0]

    def test_no_empty_bundles_means_zero_start(self):
        inst = make_instance([({1, 2}, {1}, 1.0)], eta_max=1)
        (root,) = init_labels(inst)
        assert root.profit == 0.0


class TestExtend:
    def test_collect_then_close_at_capacity(self):
        inst = make_instance([({1, 2}, {1}, 2.0)], eta_max=1)
        (root,) = init_labels(inst)
        child = extend(root, 1, inst)
        assert child.profit == pytest.approx(2.0)
        assert list(child.status) == [-1]

    def test_rejected_product_closes_without_withdrawal(self):
        # freezing disabled: product 2 only ever hurts here and would be
        # frozen out before the arithmetic under test could run
        inst = make_instance([({1, 2}, {1}, 2.0)], eta_max=1)
        (root,) = init_labels(inst, use_unreachable=False)
        child = extend(root, 2, inst, use_unreachable=False)
        assert child.profit == 0.0
        assert list(child.status) == [-1]

    def test_rejected_product_withdraws_collected_reward(self):
        inst = make_instance([({1, 2}, {1}, 2.0)], eta_max=2)
        root = init_labels(inst, use_unreachable=False)[1]
        collected = extend(root, 1, inst, use_unreachable=False)
        assert collected.profit == pytest.approx(2.0)
        assert list(collected.status) == [1]  # collected, still open
        withdrawn = extend(collected, 2, inst, use_unreachable=False)
        assert withdrawn.profit == pytest.approx(0.0)
        assert list(withdrawn.status) == [-1]

    def test_illegal_extension_rejected(self):
        inst = make_instance([({1, 2}, {1}, 1.0)], eta_max=1)
        (root,) = init_labels(inst)
        child = extend(root, 1, inst)
        with pytest.raises(ValueError):
            extend(child, 1, inst)

    def test_length_cap_respected(self):
        inst = make_instance([({1, 2}, {1}, 1.0)], eta_max=1, q=1)
        (root,) = init_labels(inst, use_unreachable=False)
        child = extend(root, 2, inst, use_unreachable=False)
        with pytest.raises(ValueError):
            extend(child, 1, inst, use_unreachable=False)


class TestCompletionBound:
    def test_all_closed_prunes_at_equality(self):
        inst = make_instance([({1}, {1}, 1.0)], eta_max=1)
        (root,) = init_labels(inst)
        label = extend(root, 1, inst)
        label.profit = 4.0
        label.status = np.array([-1], dtype=np.int8)
        assert completion_bound_prune(label, 4.0, inst)

    def test_open_positive_reward_keeps_label(self):
        inst = make_instance([({1}, {1}, 3.0)], eta_max=1)
        (root,) = init_labels(inst)
        assert completion_bound(root, inst) == pytest.approx(3.0)
        assert not completion_bound_prune(root, 2.0, inst)

    def test_recoverable_negative_keeps_label(self):
        inst = make_instance([({1, 2}, {1}, -1.0)], eta_max=2)
        root = init_labels(inst)[1]
        label = extend(root, 1, inst)  # collected the -1
        assert label.profit == pytest.approx(-1.0)
        assert completion_bound(label, inst) == pytest.approx(0.0)
        assert not completion_bound_prune(label, -0.5, inst)


class TestUnreachable:
    def test_unmentioned_product_is_frozen(self):
        inst = make_instance([({1}, {1}, 1.0)], n=2, eta_max=1)
        (root,) = init_labels(inst)
        assert unreachable_update(root, inst) == 0b10  # product 2

    def test_open_bundle_member_is_live(self):
        inst = make_instance([({1, 2}, {1, 2}, 1.0)], eta_max=2)
        root = init_labels(inst)[1]
        assert unreachable_update(root, inst) == 0

    def test_open_negative_rejected_member_is_live(self):
        # appending 2 after collecting the negative reward recovers it, so 2
        # must stay extendable while the transaction is open
        inst = make_instance([({1, 2}, {1}, -1.0), ({1}, {1}, 10.0)], eta_max=2)
        root = init_labels(inst)[1]
        assert unreachable_update(root, inst) == 0
        res = solve_pricing(inst)
        assert res.best_profit == pytest.approx(10.0)

    def test_closing_all_mentions_freezes_product(self):
        inst = make_instance([({1, 2}, {1}, 1.0)], eta_max=1)
        (root,) = init_labels(inst)
        child = extend(root, 1, inst)  # closes the only transaction
        assert unreachable_update(child, inst) == 0b10

    def test_monotone_along_chains(self):
        rng = random.Random(5)
        for _ in range(50):
            inst = random_instance(rng, n_max=5, t_max=10)
            (label,) = init_labels(inst)[:1]
            while True:
                children = extend_all(label, inst)
                if not children:
                    break
                child = rng.choice(children)
                assert label.frozen & ~child.frozen == 0
                label = child


class TestDominance:
    def test_reflexive(self):
        inst = make_instance([({1, 2}, {1}, 1.0)], eta_max=2)
        root = init_labels(inst)[1]
        assert dominates(root, root, inst)

    def test_prefix_with_higher_profit_dominates(self):
        inst = make_instance(
            [({1}, (), 5.0), ({2, 3}, {2}, -2.0)], n=3, eta_max=1)
        (root,) = init_labels(inst)
        worse = extend(root, 2, inst)  # collects -2 and closes
        assert root.profit == 5.0 and worse.profit == 3.0
        assert dominates(root, worse, inst)
        assert not dominates(worse, root, inst)

    def test_open_positive_blocks_domination(self):
        # the extended label is one coincidence ahead on a positive bundle the
        # root can no longer match inside any common extension
        inst = make_instance([({1, 2}, {1, 2}, 3.0), ({3}, (), 5.0)],
                             n=3, eta_max=2)
        (root,) = init_labels(inst)[1:]
        ahead = extend(root, 1, inst)
        assert not dominates(root, ahead, inst)

    def test_unequal_capacity_never_dominates(self):
        inst = make_instance([({1, 2}, {1}, 1.0)], eta_max=2)
        r1, r2 = init_labels(inst)
        assert not dominates(r1, r2, inst)
        assert not dominates(r2, r1, inst)


class TestSolve:
    def test_single_transaction(self):
        inst = make_instance([({1, 2}, {1}, 1.0)], eta_max=1)
        res = solve_pricing(inst)
        assert res.best_profit == pytest.approx(1.0)
        assert res.best_type == ConsumerType((1,), 1)

    def test_two_disjoint_transactions(self):
        inst = make_instance([({1}, {1}, 1.0), ({2}, {2}, 1.0)], eta_max=1)
        res = solve_pricing(inst)
        assert res.best_profit == pytest.approx(2.0)
        assert set(res.best_type.sigma) == {1, 2}

    def test_all_negative_prefers_passive(self):
        inst = make_instance([({1}, {1}, -1.0)], eta_max=1)
        res = solve_pricing(inst)
        assert res.best_profit == 0.0
        assert res.best_type == PASSIVE

    def test_empty_instance_rejected(self):
        inst = make_instance([({1}, {1}, 0.0)])
        with pytest.raises(ValueError):
            solve_pricing(inst)

    def test_result_matches_replay(self):
        rng = random.Random(17)
        for _ in range(40):
            inst = random_instance(rng)
            res = solve_pricing(inst)
            assert res.best_profit == pytest.approx(
                profit_of_type(inst, res.best_type), abs=1e-9)

    def test_oracle_equivalence_small(self):
        rng = random.Random(23)
        for _ in range(120):
            inst = random_instance(rng, n_max=6, t_max=20)
            dp = solve_pricing(inst)
            oracle = brute_force_glop(inst)
            assert dp.best_profit == pytest.approx(oracle.best_profit, abs=1e-9)

    def test_queue_disciplines_agree(self):
        rng = random.Random(29)
        for _ in range(20):
            inst = random_instance(rng, n_max=5, t_max=12)
            profits = {
                solve_pricing(inst, queue_discipline=d).best_profit
                for d in ("best", "fifo", "lifo")
            }
            assert max(profits) - min(profits) <= 1e-9

    def test_acceleration_toggles_preserve_optimum(self):
        rng = random.Random(31)
        for _ in range(30):
            inst = random_instance(rng, n_max=5, t_max=12)
            reference = solve_pricing(inst).best_profit
            for cb in (True, False):
                for un in (True, False):
                    got = solve_pricing(inst, use_completion_bounds=cb,
                                        use_unreachable=un).best_profit
                    assert got == pytest.approx(reference, abs=1e-9)
            assert solve_pricing(inst, use_dominance=False).best_profit == \
                pytest.approx(reference, abs=1e-9)

    def test_limited_list_respects_cap(self):
        rng = random.Random(37)
        for _ in range(30):
            inst = random_instance(rng, n_max=5, t_max=12, q_choices=(2,))
            res = solve_pricing(inst)
            assert len(res.best_type.sigma) <= 2
            oracle = brute_force_glop(inst)
            assert res.best_profit == pytest.approx(oracle.best_profit, abs=1e-9)

    def test_lb_seed_with_type_preserves_optimum(self):
        rng = random.Random(41)
        for _ in range(25):
            inst = random_instance(rng, n_max=5, t_max=12)
            h = solve_pricing_heuristic(inst, 1)
            seeded = solve_pricing(inst, lb_seed=h.best_profit, seed_type=h.best_type)
            plain = solve_pricing(inst)
            assert seeded.best_profit == pytest.approx(plain.best_profit, abs=1e-9)

    def test_bare_lb_seed_preserves_optimum(self):
        rng = random.Random(43)
        for _ in range(25):
            inst = random_instance(rng, n_max=5, t_max=12)
            h = solve_pricing_heuristic(inst, 1)
            seeded = solve_pricing(inst, lb_seed=h.best_profit)
            plain = solve_pricing(inst)
            assert seeded.best_profit == pytest.approx(plain.best_profit, abs=1e-9)


class TestReplay:
    def test_status_and_profit_replay_from_root(self):
        # rebuild each solver-visited ranking by fresh extensions from the
        # root; the status vector must match exactly, the profit numerically
        rng = random.Random(47)
        for _ in range(25):
            inst = random_instance(rng, n_max=5, t_max=12)
            res = solve_pricing(inst)
            sigma, eta = res.best_type.sigma, res.best_type.eta
            if not sigma:
                continue
            label = next(r for r in init_labels(inst) if r.eta == eta)
            for j in sigma:
                label = extend(label, j, inst, use_unreachable=False)
            assert label.profit == pytest.approx(res.best_profit, abs=1e-9)
            assert label.consumer_type() == res.best_type


class TestHeuristic:
    def test_infinite_cap_equals_exact(self):
        rng = random.Random(53)
        for _ in range(20):
            inst = random_instance(rng, n_max=5, t_max=12)
            exact = solve_pricing(inst)
            relaxed = solve_pricing_heuristic(inst, 10 ** 9)
            assert relaxed.best_profit == pytest.approx(exact.best_profit, abs=1e-9)

    def test_never_exceeds_exact(self):
        rng = random.Random(59)
        for _ in range(60):
            inst = random_instance(rng, n_max=6, t_max=15)
            exact = solve_pricing(inst).best_profit
            for cap in (1, 2, 5):
                h = solve_pricing_heuristic(inst, cap)
                assert h.best_profit <= exact + 1e-9
                assert h.best_profit == pytest.approx(
                    profit_of_type(inst, h.best_type), abs=1e-9)

    def test_bad_cap_rejected(self):
        inst = make_instance([({1}, {1}, 1.0)])
        with pytest.raises(ValueError):
            solve_pricing_heuristic(inst, 0)


class TestSinglePurchaseSimplification:
    def test_matches_general_algorithm(self):
        rng = random.Random(61)
        for _ in range(40):
            inst = random_instance(rng, n_max=6, t_max=15, eta_cap=1)
            general = solve_pricing(inst)
            simplified = solve_pricing(inst, single_purchase_dominance=True)
            assert simplified.best_profit == pytest.approx(
                general.best_profit, abs=1e-9)

    def test_requires_capacity_one(self):
        inst = make_instance([({1, 2}, {1}, 1.0)], eta_max=2)
        with pytest.raises(ValueError):
            solve_pricing(inst, single_purchase_dominance=True)
