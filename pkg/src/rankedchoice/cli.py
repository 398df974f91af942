"""Command-line interface.

Subcommands: generate, estimate, price, evaluate, assort, simulate, bench.
Every run prints a short human summary followed by a machine-readable JSON
document (written to --out instead, when given). Exit codes: 0 success,
2 usage error, 3 data error, 4 time limit reached.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import io as rcio
from .assortment import (
    aao_ratio,
    build_probit_population,
    dump_population,
    expected_revenue,
    load_population,
    optimize_assortment,
    simulate_revenue,
)
from .datagen import FAMILIES, GenSpec, generate, write_instance_dir
from .driver import CgConfig, CgReport, run_estimation
from .master_em import CoverageError
from .metrics import hrmse, mrmse, srmse
from .model import TransactionLog
from .oracle import OracleConfig, brute_force_glop
from .pricing import PricingInstance, solve_pricing, solve_pricing_heuristic
from .simplex import SimplexError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_TIME_LIMIT = 4

DATA_ERRORS = (ValueError, KeyError, OSError, json.JSONDecodeError,
               CoverageError, SimplexError)


def shifted_geomean(values, shift: float) -> float:
    """sgm(x, s) = (prod (x_i + s))^(1/n) - s."""
    values = list(values)
    if not values:
        return float("nan")
    return math.exp(sum(math.log(v + shift) for v in values) / len(values)) - shift


def _emit(payload: dict, summary: list[str], out: str | None) -> None:
    for line in summary:
        print(line)
    text = json.dumps(payload, indent=1)
    if out:
        Path(out).write_text(text + "\n")
        print(f"wrote {out}")
    else:
        print(text)


def _load_train(args) -> tuple[TransactionLog, int, dict]:
    path = Path(args.train)
    if path.is_dir():
        data = rcio.load_instance_dir(path)
        return data["train"], data["n"], data
    log = rcio.load_log(path, getattr(args, "no_arrival_periods", 0))
    n = args.n if args.n else log.max_product()
    return log, n, {"train": log, "n": n}


def cmd_generate(args) -> int:
    spec = GenSpec(
        family=args.family,
        n=args.n,
        k=args.k,
        p1=args.p1,
        eta=args.eta,
        periods=args.periods,
        arrivals_per_period=args.arrivals,
        pd=args.pd,
        swaps=args.swaps,
        strong=args.strong,
        num_transactions=args.transactions,
        seed=args.seed,
    )
    result = generate(spec)
    write_instance_dir(result, args.out, spec)
    payload = {
        "family": spec.family,
        "n": result.n,
        "train_transactions": len(result.train),
        "test_transactions": len(result.test),
        "ground_truth_types": len(result.truth.types) if result.truth else None,
        "directory": str(args.out),
    }
    summary = [f"generated {spec.family} instance: n={result.n}, "
               f"{len(result.train)} train / {len(result.test)} test transactions"]
    _emit(payload, summary, None)
    return EXIT_OK


def cmd_estimate(args) -> int:
    log, n, _ = _load_train(args)
    cfg = CgConfig(
        master=args.master,
        eta_max=args.eta_max,
        q=args.q,
        use_heuristic=args.heuristic == "on",
        use_heuristic_lb_seed=args.heuristic == "on",
        time_limit=args.time_limit,
        max_columns=args.max_columns,
        alpha=args.alpha,
        verbose=args.verbose,
    )
    model, report = run_estimation(log, cfg, n=n)
    if args.out:
        rcio.dump_model(model, args.out)
    payload = {"model": None if args.out else rcio.model_to_dict(model),
               "report": report.to_dict()}
    summary = [
        f"{args.master} estimation: {len(model.types)} types, "
        f"objective {report.final_objective:.6g}, "
        f"{report.termination_reason} after {report.iterations} iterations "
        f"({report.wall_time:.2f}s)",
    ]
    if args.verbose:
        summary += [json.dumps(rec) for rec in report.trace]
    if args.out:
        summary.append(f"model written to {args.out}")
    _emit(payload, summary, args.report)
    return EXIT_TIME_LIMIT if report.termination_reason == "time_limit" else EXIT_OK


def cmd_price(args) -> int:
    with open(args.instance) as fh:
        inst = PricingInstance.from_dict(json.load(fh))
    if args.engine == "oracle":
        result = brute_force_glop(inst, OracleConfig(n_limit=args.oracle_limit))
    elif args.engine == "dp":
        result = solve_pricing(inst)
    elif args.engine in ("dp-heur2", "dp-heur5"):
        result = solve_pricing_heuristic(inst, int(args.engine[-1]))
    else:
        raise ValueError(f"unknown engine {args.engine!r}")
    payload = result.to_dict()
    payload["engine"] = args.engine
    summary = [f"{args.engine}: profit {result.best_profit:.6g} at "
               f"sigma={list(result.best_type.sigma)}, eta={result.best_type.eta} "
               f"({result.labels_generated} labels)"]
    _emit(payload, summary, args.out)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    model = rcio.load_model(args.model)
    record = {"srmse": None, "hrmse": None, "mrmse": None}
    if args.truth:
        truth = rcio.load_model(args.truth)
        record["srmse"] = srmse(model, truth, n=args.n, eta=args.eta)
    if args.test:
        test = rcio.load_log(args.test)
        record["hrmse"] = hrmse(model, test, eta=args.eta)
        record["mrmse"] = mrmse(model, test)
    summary = ["evaluation: " + ", ".join(
        f"{k}={v:.6g}" if v is not None else f"{k}=n/a" for k, v in record.items())]
    _emit(record, summary, args.out)
    return EXIT_OK


def cmd_assort(args) -> int:
    model = rcio.load_model(args.model)
    revenues = rcio.load_revenues(args.revenues)
    n = args.n or len(revenues)
    offer, value = optimize_assortment(model, revenues, n)
    payload = {"assortment": list(offer), "expected_revenue": value}
    if args.truth:
        truth = rcio.load_model(args.truth)
        payload["aao_ratio"] = aao_ratio(truth, model, revenues, n)
        payload["revenue_under_truth"] = expected_revenue(truth, offer, revenues)
    summary = [f"best assortment {list(offer)} with expected revenue {value:.6g}"]
    _emit(payload, summary, args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    if args.params:
        with open(args.params) as fh:
            params = json.load(fh)
        pop = build_probit_population(params, args.m, args.seed)
        if args.population_out:
            dump_population(pop, args.population_out)
    elif args.population:
        pop = load_population(args.population)
    else:
        raise ValueError("either --params or --population is required")
    payload = {"consumers": len(pop)}
    summary = [f"population of {len(pop)} consumers"]
    if args.assortment:
        revenues = rcio.load_revenues(args.revenues)
        offer = [int(tok) for tok in args.assortment.split(",") if tok]
        payload["assortment"] = offer
        payload["mean_revenue"] = simulate_revenue(pop, offer, revenues)
        summary.append(f"simulated mean revenue {payload['mean_revenue']:.6g} "
                       f"on assortment {offer}")
    _emit(payload, summary, args.out)
    return EXIT_OK


def _bench_one(task) -> dict:
    directory, master, eta_max, q, time_limit = task
    data = rcio.load_instance_dir(directory)
    cfg = CgConfig(master=master, eta_max=eta_max, q=q, time_limit=time_limit)
    t0 = time.perf_counter()
    model, report = run_estimation(data["train"], cfg, n=data["n"])
    wall = time.perf_counter() - t0
    row = {
        "instance": Path(directory).name,
        "engine": master,
        "wall_s": round(wall, 6),
        "objective": report.final_objective,
        "columns": len(model.types),
        "termination": report.termination_reason,
    }
    if data.get("truth") is not None and data["n"] <= 12:
        row["_srmse"] = srmse(model, data["truth"], n=data["n"])
    return row


def cmd_bench(args) -> int:
    root = Path(args.dir)
    instances = sorted(p for p in root.iterdir() if (p / rcio.HEADER_FILE).exists())
    if not instances:
        raise ValueError(f"no instance directories under {root}")
    masters = [m.strip() for m in args.masters.split(",") if m.strip()]
    tasks = [(str(p), m, args.eta_max, args.q, args.time_limit)
             for p in instances for m in masters]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_bench_one, tasks))
    else:
        rows = [_bench_one(t) for t in tasks]
    columns = ["instance", "engine", "wall_s", "objective", "columns", "termination"]
    with open(args.out, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, extrasaction="ignore")
        writer.writeheader()
        writer.writerows(rows)
    payload = {
        "instances": len(instances),
        "runs": len(rows),
        "csv": str(args.out),
        "sgm_wall_s": shifted_geomean([r["wall_s"] for r in rows], 1.0),
    }
    rmses = [r["_srmse"] for r in rows if "_srmse" in r]
    if rmses:
        payload["sgm_srmse"] = shifted_geomean(rmses, 0.01)
    summary = [f"benchmarked {len(rows)} runs over {len(instances)} instances; "
               f"sgm wall time {payload['sgm_wall_s']:.3f}s"]
    _emit(payload, summary, None)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rankedchoice",
        description="Estimate and evaluate ranked-list choice models from transactions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic instance directory")
    p.add_argument("--family", required=True, choices=FAMILIES)
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--p1", type=float, default=0.5)
    p.add_argument("--eta", type=int, default=1)
    p.add_argument("--periods", type=int, default=30)
    p.add_argument("--arrivals", type=int, default=None)
    p.add_argument("--pd", type=float, default=0.0)
    p.add_argument("--swaps", type=int, default=0)
    p.add_argument("--strong", action="store_true")
    p.add_argument("--transactions", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("estimate", help="fit a choice model to a transaction log")
    p.add_argument("--train", required=True, help="instance directory or JSONL log")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--no-arrival-periods", type=int, default=0)
    p.add_argument("--master", choices=("em", "l1"), default="l1")
    p.add_argument("--eta-max", type=int, default=None)
    p.add_argument("--q", type=int, default=None)
    p.add_argument("--heuristic", choices=("on", "off"), default="on")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--time-limit", type=float, default=None)
    p.add_argument("--max-columns", type=int, default=None)
    p.add_argument("-o", "--out", default=None, help="model JSON path")
    p.add_argument("--report", default=None, help="report JSON path")
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("price", help="solve one pricing instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--engine", choices=("dp", "dp-heur2", "dp-heur5", "oracle"),
                   default="dp")
    p.add_argument("--oracle-limit", type=int, default=8)
    p.add_argument("-o", "--out", default=None)
    p.set_defaults(func=cmd_price)

    p = sub.add_parser("evaluate", help="score a model against truth or a test log")
    p.add_argument("--model", required=True)
    p.add_argument("--truth", default=None)
    p.add_argument("--test", default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--eta", type=int, default=None)
    p.add_argument("-o", "--out", default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("assort", help="optimize an assortment under a model")
    p.add_argument("--model", required=True)
    p.add_argument("--revenues", required=True)
    p.add_argument("--truth", default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("-o", "--out", default=None)
    p.set_defaults(func=cmd_assort)

    p = sub.add_parser("simulate", help="Monte Carlo revenue evaluation")
    p.add_argument("--params", default=None, help="probit parameter JSON")
    p.add_argument("--population", default=None, help="existing population JSONL")
    p.add_argument("--population-out", default=None)
    p.add_argument("--m", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--assortment", default=None, help="comma-separated product ids")
    p.add_argument("--revenues", default=None)
    p.add_argument("-o", "--out", default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bench", help="sweep a directory of instances")
    p.add_argument("--dir", required=True)
    p.add_argument("--masters", default="l1,em")
    p.add_argument("--eta-max", type=int, default=None)
    p.add_argument("--q", type=int, default=None)
    p.add_argument("--time-limit", type=float, default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("-o", "--out", required=True, help="CSV path")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DATA_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
