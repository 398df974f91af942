"""Root-mean-square evaluation metrics for estimated choice models.

Three flavours:
  * srmse: against a known ground-truth model, over every offer set and every
    bundle up to the capacity cap (full enumeration, small universes only);
  * hrmse: against out-of-sample transactions, with an indicator in place of
    ground-truth probabilities;
  * mrmse: per-product marginal purchase probabilities against out-of-sample
    indicators, informative even when the estimated capacity cannot reproduce
    the observed bundle sizes.
"""

from __future__ import annotations

from itertools import combinations
from math import comb, sqrt

from .model import ChoiceModel, TransactionLog, bundle_distribution

SRMSE_MAX_N = 12


def bundle_space_size(offer_size: int, eta: int) -> int:
    """Number of bundles drawn from an offer of the given size with at most
    ``eta`` products, the empty bundle included."""
    return sum(comb(offer_size, i) for i in range(0, min(eta, offer_size) + 1))


def _distribution_within_cap(model: ChoiceModel, offer, eta: int):
    """Predicted bundle distribution restricted to bundles of size <= eta."""
    return {
        b: p for b, p in bundle_distribution(model, offer).items() if len(b) <= eta
    }


def srmse(
    model: ChoiceModel,
    truth: ChoiceModel,
    n: int | None = None,
    eta: int | None = None,
    include_empty_offer: bool = False,
) -> float:
    """Soft RMSE between two models over all non-empty offers S of {1..n}.

    ``eta`` defaults to the larger of the two models' capacities. The empty
    offer contributes a zero error term (both models "predict" the empty
    bundle with certainty) and is excluded by default.
    """
    if n is None:
        n = max(model.max_product(), truth.max_product())
    if n < 1:
        raise ValueError("need a non-empty product universe")
    if n > SRMSE_MAX_N:
        raise ValueError(f"srmse enumerates all offers; n={n} exceeds {SRMSE_MAX_N}")
    if eta is None:
        eta = max(model.max_eta(), truth.max_eta())
    num = 0.0
    den = 1 if include_empty_offer else 0
    products = range(1, n + 1)
    for size in range(1, n + 1):
        space = bundle_space_size(size, eta)
        for offer in combinations(products, size):
            den += space
            dist_m = _distribution_within_cap(model, offer, eta)
            dist_t = _distribution_within_cap(truth, offer, eta)
            for b in dist_m.keys() | dist_t.keys():
                num += (dist_m.get(b, 0.0) - dist_t.get(b, 0.0)) ** 2
    return sqrt(num / den)


def hrmse(model: ChoiceModel, test: TransactionLog, eta: int | None = None) -> float:
    """Hard RMSE on out-of-sample transactions: squared gaps between the
    one-hot observed bundle and the predicted bundle distribution, summed over
    the bundle space of each transaction's offer."""
    if not test.transactions:
        raise ValueError("need a non-empty test log")
    if eta is None:
        eta = max(len(t.bundle) for t in test.transactions)
    num = 0.0
    den = 0
    cache: dict[tuple[int, ...], dict] = {}
    for t in test.transactions:
        dist = cache.get(t.offer)
        if dist is None:
            dist = cache[t.offer] = _distribution_within_cap(model, t.offer, eta)
        den += bundle_space_size(len(t.offer), eta)
        observed = frozenset(t.bundle)
        keys = dist.keys() | ({observed} if len(observed) <= eta else set())
        for b in keys:
            indicator = 1.0 if b == observed else 0.0
            num += (indicator - dist.get(b, 0.0)) ** 2
    return sqrt(num / den)


def marginal_probabilities(model: ChoiceModel, offer) -> dict[int, float]:
    """P(product j is purchased | offer), for each offered j."""
    out = {j: 0.0 for j in offer}
    for b, p in bundle_distribution(model, offer).items():
        for j in b:
            out[j] += p
    return out


def mrmse(model: ChoiceModel, test: TransactionLog) -> float:
    """Marginal RMSE on out-of-sample transactions: per-product purchase
    indicators against predicted marginal purchase probabilities."""
    if not test.transactions:
        raise ValueError("need a non-empty test log")
    num = 0.0
    den = 0
    cache: dict[tuple[int, ...], dict[int, float]] = {}
    for t in test.transactions:
        marg = cache.get(t.offer)
        if marg is None:
            marg = cache[t.offer] = marginal_probabilities(model, t.offer)
        den += len(t.offer)
        bought = set(t.bundle)
        for j in t.offer:
            indicator = 1.0 if j in bought else 0.0
            num += (indicator - marg[j]) ** 2
    return sqrt(num / den)
