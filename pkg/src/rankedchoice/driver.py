"""Column-generation driver: alternates a restricted master with the pricing
solver until no acceptable column remains.

Two master modes:
  * ``l1``: heuristic pricing first (bucket caps tried in order), falling back
    to the exact solver only when the heuristics come up empty; a column is
    added when the convexity dual plus its reward is positive.
  * ``em``: exact pricing every iteration (heuristic pricing only seeds the
    incumbent bound), with the likelihood-ratio test as gatekeeper; the run
    stops at the first rejection or when the best reward no longer exceeds
    the transaction count.

Only the single best column per pricing call is added.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from .model import (
    ChoiceModel,
    ConsumerType,
    TransactionLog,
    empirical_probabilities,
    estimate_arrival_rate,
)
from . import master_em, master_l1
from .master_em import CoverageError, EmState
from .master_l1 import L1State
from .pricing import PricingInstance, solve_pricing, solve_pricing_heuristic

PROB_DROP = 1e-10


@dataclass
class CgConfig:
    master: str = "l1"                       # "em" or "l1"
    eta_max: int | None = None
    q: int | None = None
    heuristic_caps: tuple[int, ...] = (2, 5)
    use_heuristic: bool = True               # l1: heuristic pricing rounds
    use_heuristic_lb_seed: bool = True       # em: seed the exact DP's incumbent
    time_limit: float | None = None
    max_columns: int | None = None
    alpha: float = 0.05
    em_tol: float = 1e-8
    em_max_iter: int = 2000
    reduced_cost_tol: float = 1e-6
    verbose: bool = False

    def __post_init__(self) -> None:
        if self.master not in ("em", "l1"):
            raise ValueError(f"unknown master {self.master!r}")
        if self.eta_max is not None and self.eta_max < 1:
            raise ValueError("eta_max must be at least 1")
        if any(cap < 1 for cap in self.heuristic_caps):
            raise ValueError("heuristic caps must be at least 1")


@dataclass
class CgReport:
    iterations: int = 0
    columns_added: int = 0
    final_objective: float = float("nan")
    pricing_calls_heuristic: int = 0
    pricing_calls_exact: int = 0
    wall_time: float = 0.0
    termination_reason: str = ""
    objectives: list[float] = field(default_factory=list)
    trace: list[dict[str, Any]] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "iterations": self.iterations,
            "columns_added": self.columns_added,
            "final_objective": self.final_objective,
            "pricing_calls": {
                "heuristic": self.pricing_calls_heuristic,
                "exact": self.pricing_calls_exact,
            },
            "wall_time": self.wall_time,
            "termination_reason": self.termination_reason,
        }


def _finalize(types, probs, lam) -> ChoiceModel:
    kept = [(c, float(p)) for c, p in zip(types, probs) if p >= PROB_DROP]
    if not kept:
        kept = [(types[int(np.argmax(probs))], 1.0)]
    total = sum(p for _, p in kept)
    return ChoiceModel(
        tuple(c for c, _ in kept),
        tuple(p / total for _, p in kept),
        lam,
    )


def run_estimation(
    log: TransactionLog,
    cfg: CgConfig | None = None,
    n: int | None = None,
) -> tuple[ChoiceModel, CgReport]:
    """Estimate a choice model from a transaction log.

    ``n`` defaults to the largest product id appearing in any offer. The
    returned model carries the closed-form arrival rate; types whose final
    probability is below 1e-10 are dropped and the rest renormalized.
    """
    if cfg is None:
        cfg = CgConfig()
    if not log.transactions:
        raise ValueError("cannot estimate from an empty log")
    if n is None:
        n = log.max_product()
    if cfg.eta_max is None:
        # capacities beyond the largest observed bundle only slow the search
        observed = max((len(t.bundle) for t in log.transactions), default=1)
        cfg = replace(cfg, eta_max=max(1, observed))
    lam = estimate_arrival_rate(log)
    start = time.perf_counter()
    if cfg.master == "l1":
        model, report = _run_l1(log, cfg, n, lam, start)
    else:
        model, report = _run_em(log, cfg, n, lam, start)
    report.wall_time = time.perf_counter() - start
    return model, report


def _timed_out(cfg: CgConfig, start: float) -> bool:
    return cfg.time_limit is not None and time.perf_counter() - start >= cfg.time_limit


def _run_l1(log, cfg, n, lam, start) -> tuple[ChoiceModel, CgReport]:
    report = CgReport()
    market = empirical_probabilities(log)
    state: L1State = master_l1.build_l1_state(market)
    while True:
        master_l1.build_and_solve(state)
        report.iterations += 1
        report.objectives.append(state.objective)
        if cfg.verbose:
            report.trace.append({
                "iter": report.iterations,
                "objective": state.objective,
                "columns": len(state.columns),
            })
        if _timed_out(cfg, start):
            report.termination_reason = "time_limit"
            break
        if cfg.max_columns is not None and report.columns_added >= cfg.max_columns:
            report.termination_reason = "column_cap"
            break
        rewards = master_l1.pricing_rewards(state)
        if not any(mu != 0.0 for _, _, mu in rewards):
            # no row can sway any type; only the convexity dual could, and at
            # optimality it cannot be positive
            report.termination_reason = "converged"
            break
        inst = PricingInstance(n, rewards, eta_max=cfg.eta_max, q=cfg.q)
        candidate = None
        if cfg.use_heuristic:
            for cap in cfg.heuristic_caps:
                res = solve_pricing_heuristic(inst, cap)
                report.pricing_calls_heuristic += 1
                if (master_l1.is_improving(state, res.best_profit, cfg.reduced_cost_tol)
                        and res.best_type not in state.columns):
                    candidate = res.best_type
                    break
        if candidate is None:
            res = solve_pricing(inst)
            report.pricing_calls_exact += 1
            if (master_l1.is_improving(state, res.best_profit, cfg.reduced_cost_tol)
                    and res.best_type not in state.columns):
                candidate = res.best_type
            else:
                report.termination_reason = "converged"
                break
        master_l1.add_column(state, candidate)
        report.columns_added += 1
    report.final_objective = state.objective
    model = _finalize(state.columns, state.x, lam)
    return model, report


def _run_em(log, cfg, n, lam, start) -> tuple[ChoiceModel, CgReport]:
    report = CgReport()
    columns = master_em.initial_columns(log, n, eta_max=cfg.eta_max, q=cfg.q)
    state: EmState = master_em.build_em_state(log, columns)
    master_em.em_solve(state, cfg.em_tol, cfg.em_max_iter)
    threshold = float(state.num_transactions)
    while True:
        report.iterations += 1
        report.objectives.append(state.loglik)
        if _timed_out(cfg, start):
            report.termination_reason = "time_limit"
            break
        if cfg.max_columns is not None and report.columns_added >= cfg.max_columns:
            report.termination_reason = "column_cap"
            break
        rewards = master_em.pricing_rewards(state)
        inst = PricingInstance(n, rewards, eta_max=cfg.eta_max, q=cfg.q)
        lb_seed = seed_type = None
        if cfg.use_heuristic_lb_seed:
            seed = solve_pricing_heuristic(inst, cfg.heuristic_caps[0])
            report.pricing_calls_heuristic += 1
            lb_seed, seed_type = seed.best_profit, seed.best_type
        res = solve_pricing(inst, lb_seed=lb_seed, seed_type=seed_type)
        report.pricing_calls_exact += 1
        if res.best_profit <= threshold + master_em.ACCEPT_TOL:
            report.termination_reason = "converged"
            break
        if res.best_type in state.columns:
            # the best attainable reward is carried by a column already priced
            # in; nothing new can beat it
            report.termination_reason = "converged"
            break
        accepted, state = master_em.accept_column(
            state, res.best_type, res.best_profit,
            alpha=cfg.alpha, tol=cfg.em_tol, max_iter=cfg.em_max_iter,
        )
        if cfg.verbose:
            report.trace.append({
                "iter": report.iterations,
                "loglik": state.loglik,
                "columns": len(state.columns),
                "accepted": accepted,
            })
        if not accepted:
            report.termination_reason = "lr_failed"
            break
        report.columns_added += 1
    report.final_objective = state.loglik
    model = _finalize(state.columns, state.x, lam)
    return model, report
