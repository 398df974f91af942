"""Core data model: choice rule, compatibility, empirical probabilities."""

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rankedchoice.model import (
    PASSIVE,
    ChoiceModel,
    ConsumerType,
    Transaction,
    TransactionLog,
    bundle_distribution,
    empirical_probabilities,
    estimate_arrival_rate,
    is_compatible,
    predicted_probability,
    purchase_outcome,
)
from rankedchoice import io as rcio


def T(offer, bundle=()):
    return Transaction(tuple(offer), tuple(bundle))


class TestPurchaseOutcome:
    def test_top_eta_restricted_to_offer(self):
        c = ConsumerType((3, 1, 2), 2)
        assert purchase_outcome(c, {1, 2, 4}) == {1, 2}

    def test_passive_buys_nothing(self):
        assert purchase_outcome(PASSIVE, {1, 2}) == frozenset()

    def test_disjoint_offer_buys_nothing(self):
        assert purchase_outcome(ConsumerType((5,), 1), {1, 2}) == frozenset()

    def test_empty_offer_rejected(self):
        with pytest.raises(ValueError):
            purchase_outcome(PASSIVE, ())


class TestCompatibility:
    def test_single_purchase_match(self):
        assert is_compatible(ConsumerType((2, 1), 1), T({1, 2}, {2}))

    def test_capacity_two_buys_both(self):
        assert not is_compatible(ConsumerType((2, 1), 2), T({1, 2}, {2}))

    def test_passive_matches_no_purchase(self):
        assert is_compatible(PASSIVE, T({1}))


class TestTypes:
    def test_transaction_canonicalized(self):
        t = Transaction((3, 1, 2), (2, 1))
        assert t.offer == (1, 2, 3)
        assert t.bundle == (1, 2)
        assert t.rejected == (3,)

    def test_bundle_must_be_subset(self):
        with pytest.raises(ValueError):
            Transaction((1, 2), (3,))

    def test_type_rejects_repeats(self):
        with pytest.raises(ValueError):
            ConsumerType((1, 2, 1), 1)

    def test_type_rejects_zero_capacity_with_list(self):
        with pytest.raises(ValueError):
            ConsumerType((1,), 0)

    def test_passive_is_canonical(self):
        with pytest.raises(ValueError):
            ConsumerType((), 2)

    def test_model_requires_simplex(self):
        with pytest.raises(ValueError):
            ChoiceModel((PASSIVE,), (0.5,))
        with pytest.raises(ValueError):
            ChoiceModel((PASSIVE, PASSIVE), (0.5, 0.5))


class TestEmpiricalProbabilities:
    def test_counting(self):
        log = TransactionLog((T({1, 2}, {1}), T({1, 2}, {1}), T({1, 2})))
        market = empirical_probabilities(log)
        assert market.entries[((1, 2), (1,))] == pytest.approx(2 / 3)
        assert market.entries[((1, 2), ())] == pytest.approx(1 / 3)

    def test_single_transaction(self):
        market = empirical_probabilities(TransactionLog((T({1}, {1}),)))
        assert market.entries[((1,), (1,))] == 1.0

    def test_distinct_offers_are_separate_rows(self):
        log = TransactionLog((T({1, 2}, {1}), T({1, 3}, {3})))
        market = empirical_probabilities(log)
        assert len(market) == 2
        assert all(v == 1.0 for v in market.entries.values())

    def test_row_sums_are_one_per_offer(self):
        log = TransactionLog(
            (T({1, 2}, {1}), T({1, 2}, {2}), T({1, 2}), T({3}, {3}))
        )
        market = empirical_probabilities(log)
        sums = {}
        for (offer, _), v in market.entries.items():
            sums[offer] = sums.get(offer, 0.0) + v
        assert all(abs(s - 1.0) < 1e-9 for s in sums.values())


class TestPredictedProbability:
    def test_single_compatible_type(self):
        model = ChoiceModel((ConsumerType((1,), 1),), (1.0,))
        assert predicted_probability(model, {1}, {1, 2}) == 1.0

    def test_both_types_buy_nothing(self):
        model = ChoiceModel((ConsumerType((1,), 1), PASSIVE), (0.6, 0.4))
        assert predicted_probability(model, set(), {2}) == pytest.approx(1.0)

    def test_partial_mass(self):
        model = ChoiceModel((ConsumerType((1,), 1), PASSIVE), (0.6, 0.4))
        assert predicted_probability(model, {1}, {1}) == pytest.approx(0.6)


class TestArrivalRate:
    def test_closed_form(self):
        log = TransactionLog(
            tuple([T({1}, {1})] * 6 + [T({1})] * 2), no_arrival_periods=2)
        assert estimate_arrival_rate(log) == pytest.approx(0.8)

    def test_no_idle_periods(self):
        log = TransactionLog((T({1}, {1}),))
        assert estimate_arrival_rate(log) == 1.0

    def test_mostly_idle(self):
        log = TransactionLog((T({1}, {1}),), no_arrival_periods=3)
        assert estimate_arrival_rate(log) == pytest.approx(0.25)

    def test_all_idle_rejected(self):
        with pytest.raises(ValueError):
            estimate_arrival_rate(TransactionLog((), no_arrival_periods=5))


products = st.integers(min_value=1, max_value=8)


@st.composite
def consumer_types(draw):
    sigma = draw(st.lists(products, unique=True, max_size=8))
    if not sigma:
        return PASSIVE
    return ConsumerType(tuple(sigma), draw(st.integers(1, 8)))


@given(consumer_types(), st.sets(products, min_size=1, max_size=8))
def test_outcome_is_bounded_subset(c, offer):
    out = purchase_outcome(c, offer)
    assert out <= offer
    assert len(out) <= c.eta


@given(st.lists(consumer_types(), min_size=1, max_size=6, unique=True),
       st.sets(products, min_size=1, max_size=8))
@settings(max_examples=60)
def test_bundle_distribution_partitions_mass(types, offer):
    probs = [1.0 / len(types)] * len(types)
    model = ChoiceModel(tuple(types), tuple(probs))
    dist = bundle_distribution(model, offer)
    assert sum(dist.values()) == pytest.approx(1.0)


@given(st.lists(consumer_types(), min_size=1, max_size=5, unique=True))
@settings(max_examples=60)
def test_model_round_trip(types):
    probs = [1.0 / len(types)] * len(types)
    model = ChoiceModel(tuple(types), tuple(probs), lam=0.75)
    again = rcio.model_from_dict(json.loads(json.dumps(rcio.model_to_dict(model))))
    assert again == model


def test_log_round_trip(tmp_path):
    log = TransactionLog((T({1, 2}, {1}), T({2, 5, 7}, {5}), T({3})), 4)
    path = tmp_path / "log.jsonl"
    rcio.dump_log(log, path)
    again = rcio.load_log(path, no_arrival_periods=4)
    assert again == log


def test_sigma_sentinel_stripped_on_load():
    data = {"lambda": 1.0,
            "types": [{"sigma": [3, 1, 0, 2], "eta": 2, "prob": 1.0}]}
    model = rcio.model_from_dict(data)
    assert model.types[0] == ConsumerType((3, 1), 2)
