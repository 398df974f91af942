"""JSON/JSONL serialization for logs, models, pricing instances and
generated instance directories.

Formats:
  * transaction logs: JSON Lines, one ``{"offer": [...], "bundle": [...]}``
    object per arrival period, with a sidecar header
    ``{"n": ..., "no_arrival_periods": ...}``;
  * choice models: ``{"lambda": ..., "types": [{"sigma": [...], "eta": ...,
    "prob": ...}, ...]}`` where ``sigma`` is order-significant and every other
    id array is strictly increasing;
  * pricing instances: ``{"n": ..., "eta_max": ..., "q": ..., "transactions":
    [{"offer": [...], "bundle": [...], "mu": ...}]}``;
  * probit populations: JSON Lines ``{"ranking": [..., 0, ...], "q": k}`` with
    0 marking the outside option's position.

A serialized ``sigma`` may carry the no-purchase sentinel 0; the list is
truncated there on load.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .model import ChoiceModel, ConsumerType, Transaction, TransactionLog

HEADER_FILE = "header.json"
TRAIN_FILE = "train.jsonl"
TEST_FILE = "test.jsonl"
TRUTH_FILE = "ground_truth.json"
REVENUES_FILE = "revenues.json"
PROBIT_PARAMS_FILE = "probit_params.json"
POPULATION_FILE = "population.jsonl"


def _strip_sentinel(sigma: list[int]) -> list[int]:
    return sigma[: sigma.index(0)] if 0 in sigma else sigma


def dump_log(log: TransactionLog, path: str | Path) -> None:
    with open(path, "w") as fh:
        for t in log.transactions:
            fh.write(json.dumps({"offer": list(t.offer), "bundle": list(t.bundle)}) + "\n")


def load_log(path: str | Path, no_arrival_periods: int = 0) -> TransactionLog:
    transactions = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            transactions.append(Transaction(tuple(rec["offer"]), tuple(rec.get("bundle", ()))))
    return TransactionLog(tuple(transactions), no_arrival_periods)


def model_to_dict(model: ChoiceModel) -> dict[str, Any]:
    return {
        "lambda": model.lam,
        "types": [
            {"sigma": list(c.sigma), "eta": c.eta, "prob": p}
            for c, p in zip(model.types, model.probs)
        ],
    }


def model_from_dict(data: dict[str, Any]) -> ChoiceModel:
    types, probs = [], []
    for rec in data["types"]:
        sigma = _strip_sentinel([int(j) for j in rec["sigma"]])
        eta = int(rec["eta"]) if sigma else 0
        types.append(ConsumerType(tuple(sigma), eta))
        probs.append(float(rec["prob"]))
    return ChoiceModel(tuple(types), tuple(probs), float(data.get("lambda", 1.0)))


def dump_model(model: ChoiceModel, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(model_to_dict(model), fh, indent=1)
        fh.write("\n")


def load_model(path: str | Path) -> ChoiceModel:
    with open(path) as fh:
        return model_from_dict(json.load(fh))


def dump_header(path: str | Path, n: int, no_arrival_periods: int = 0, **extra: Any) -> None:
    record = {"n": n, "no_arrival_periods": no_arrival_periods, **extra}
    with open(path, "w") as fh:
        json.dump(record, fh, indent=1)
        fh.write("\n")


def load_header(path: str | Path) -> dict[str, Any]:
    with open(path) as fh:
        return json.load(fh)


def dump_revenues(revenues: list[float], path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump({"revenues": list(revenues)}, fh)
        fh.write("\n")


def load_revenues(path: str | Path) -> list[float]:
    with open(path) as fh:
        return [float(r) for r in json.load(fh)["revenues"]]


def load_instance_dir(directory: str | Path) -> dict[str, Any]:
    """Load whatever files are present in a generated instance directory."""
    directory = Path(directory)
    header = load_header(directory / HEADER_FILE)
    out: dict[str, Any] = {"header": header, "n": int(header["n"])}
    out["train"] = load_log(directory / TRAIN_FILE, int(header.get("no_arrival_periods", 0)))
    test_path = directory / TEST_FILE
    out["test"] = load_log(test_path) if test_path.exists() else None
    truth_path = directory / TRUTH_FILE
    out["truth"] = load_model(truth_path) if truth_path.exists() else None
    rev_path = directory / REVENUES_FILE
    out["revenues"] = load_revenues(rev_path) if rev_path.exists() else None
    params_path = directory / PROBIT_PARAMS_FILE
    if params_path.exists():
        with open(params_path) as fh:
            out["probit_params"] = json.load(fh)
    return out
