# SPDX-FileCopyrightText: 2026 CPIseq developers
# SPDX-License-Identifier: MIT

"""Replicate × sample size × method grid of importance runs on simulated data.

Every finished replicate is appended to a long-format rows CSV right away. Re-running
with the same configuration skips the (n, replicate) pairs already present, and the
summary is always aggregated from the whole rows file.
"""

import csv
import hashlib
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
from impuls import Task, TaskRuntime
from joblib import Parallel, delayed

from .. import json
from ..errors import DataError
from ..evalmetrics import TIE_RULE, ReplicateOutcome, aggregate
from ..learners import evaluate, fit, parse_learner_spec
from ..rng import derive_seeds
from ..simgen import generate
from ..tabular import split
from .config import METHODS, RunConfig
from .files import read_csv_records, write_csv_records, write_records
from .methods import enet_config, learner_for, method_parameters, run_method
from .simulate import scenario_config

ROW_FIELDS = (
    "scenario",
    "n",
    "method",
    "replicate",
    "feature",
    "score",
    "p",
    "relevant",
    "model_value",
    "oracle_value",
)

RESUME_INDEPENDENT = frozenset({"workers", "replicates", "n_list", "rows", "output", "top_k"})


def resume_key(config: RunConfig) -> str:
    """Hash of the options that change replicate results; rows written under a different
    key can't be resumed."""
    relevant = {k: v for k, v in sorted(config.values.items()) if k not in RESUME_INDEPENDENT}
    return hashlib.sha256(json.dumps(relevant).encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class ReplicateRun:
    n: int
    replicate: int
    rows: list[dict[str, Any]]
    error: str | None = None


def run_replicate(config: RunConfig, n: int, replicate: int) -> ReplicateRun:
    """Generates one dataset (seed + replicate) and scores every configured method on the
    same split. The learner is fitted once per distinct `learner_for` spec."""
    try:
        return ReplicateRun(n, replicate, _replicate_rows(config, n, replicate))
    except DataError as e:
        return ReplicateRun(n, replicate, [], str(e))


def _replicate_rows(config: RunConfig, n: int, replicate: int) -> list[dict[str, Any]]:
    gen = np.random.default_rng(config.seed + replicate)
    data_seed, split_seed, fit_seed, method_seed = derive_seeds(gen, 4)

    data = generate(scenario_config(config, n), data_seed)
    train, test = split(data.dataset, config["train_fraction"], np.random.default_rng(split_seed))
    spec = parse_learner_spec(config["learner"])
    models = {spec: fit(spec, train, fit_seed)}
    model_value = next(iter(evaluate(models[spec], test).values()))
    oracle_value = next(iter(data.oracle().values()), None)

    enet = enet_config(config)
    rows = list[dict[str, Any]]()
    for method in config["methods"]:
        method_spec = learner_for(method, spec)
        if method_spec not in models:
            models[method_spec] = fit(method_spec, train, fit_seed)
        outcome = run_method(
            method,
            models[method_spec],
            train,
            test,
            None,
            config["alpha"],
            enet,
            rng=method_seed,
            n_permutations=config["permutations"],
        )
        for feature, score in outcome.scores.items():
            p = outcome.p_values.get(feature) if outcome.p_values is not None else None
            rows.append(
                {
                    "scenario": config["scenario"],
                    "n": n,
                    "method": method,
                    "replicate": replicate,
                    "feature": feature,
                    "score": score,
                    "p": p,
                    "relevant": int(data.relevant.get(feature, False)),
                    "model_value": model_value,
                    "oracle_value": oracle_value,
                }
            )
    return rows


def _blank_none(row: dict[str, Any]) -> dict[str, Any]:
    return {k: "" if v is None else v for k, v in row.items()}


def _optional_float(text: str) -> float | None:
    return float(text) if text else None


def outcomes_from_rows(rows: list[dict[str, str]]) -> list[ReplicateOutcome]:
    """Groups long-format rows back into one outcome per (scenario, n, method, replicate),
    keeping the feature order of the file."""
    grouped = defaultdict[tuple[str, int, str, int], list[dict[str, str]]](list)
    for row in rows:
        grouped[row["scenario"], int(row["n"]), row["method"], int(row["replicate"])].append(row)

    outcomes = list[ReplicateOutcome]()
    for (scenario, n, method, replicate), group in sorted(grouped.items()):
        p_values = [float(r["p"]) for r in group if r["p"]]
        outcomes.append(
            ReplicateOutcome(
                scenario=scenario,
                n=n,
                method=method,
                replicate=replicate,
                features=tuple(r["feature"] for r in group),
                scores=tuple(float(r["score"]) for r in group),
                relevant=tuple(r["relevant"] == "1" for r in group),
                p_values=tuple(p_values) if len(p_values) == len(group) else None,
                model_value=_optional_float(group[0]["model_value"]),
                oracle_value=_optional_float(group[0]["oracle_value"]),
            )
        )
    return outcomes


class RunBenchmark(Task):
    def __init__(self, config: RunConfig) -> None:
        super().__init__()
        self.config = config

    def execute(self, r: TaskRuntime) -> None:
        c = self.config
        if c["replicates"] < 1:
            raise ValueError("replicates must be at least 1")
        if unknown := sorted(set(c["methods"]) - set(METHODS)):
            raise ValueError(f"unknown importance methods: {', '.join(unknown)}")

        rows_path = Path(c["rows"])
        done = self.load_done(rows_path)
        todo = [
            (n, replicate)
            for n in c["n_list"]
            for replicate in range(c["replicates"])
            if (n, replicate) not in done
        ]
        self.logger.info(
            "Running %d replicates (%d already done) with %d workers",
            len(todo),
            len(done),
            c.workers,
        )
        if todo:
            self.run_grid(rows_path, todo)
        self.summarize(rows_path)

    def load_done(self, rows_path: Path) -> set[tuple[int, int]]:
        if not rows_path.exists():
            return set()
        metadata, rows = read_csv_records(rows_path)
        if not metadata or metadata.get("resume_key") != resume_key(self.config):
            raise DataError(f"{rows_path} was written by a different benchmark configuration")
        return {(int(row["n"]), int(row["replicate"])) for row in rows}

    def run_grid(self, rows_path: Path, todo: list[tuple[int, int]]) -> None:
        c = self.config
        fresh = not rows_path.exists()
        with rows_path.open("a", encoding="utf-8", newline="") as f:
            if fresh:
                metadata = c.metadata()
                metadata["resume_key"] = resume_key(c)
                write_csv_records(f, [], metadata, ROW_FIELDS)
                f.flush()
            writer = csv.DictWriter(f, ROW_FIELDS, lineterminator="\n")

            runs = Parallel(n_jobs=c.workers, return_as="generator")(
                delayed(run_replicate)(c, n, replicate) for n, replicate in todo
            )
            for run in runs:
                if run.error is not None:
                    self.logger.warning(
                        "Skipping replicate %d at n=%d: %s", run.replicate, run.n, run.error
                    )
                    continue
                writer.writerows(_blank_none(row) for row in run.rows)
                f.flush()
                self.logger.debug("Finished replicate %d at n=%d", run.replicate, run.n)

    def summarize(self, rows_path: Path) -> None:
        c = self.config
        if not rows_path.exists():
            raise DataError("no benchmark rows to summarize")
        _, rows = read_csv_records(rows_path)
        outcomes = outcomes_from_rows(rows)
        if not outcomes:
            raise DataError("every benchmark replicate was skipped")
        summary = aggregate(outcomes, alpha=c["alpha"], k=c["top_k"])

        spec = parse_learner_spec(c["learner"])
        metadata = c.metadata(
            methods={m: method_parameters(m, spec, enet_config(c), None) for m in c["methods"]},
            tie_rule=TIE_RULE,
        )
        write_records(Path(c["output"]), summary, metadata)
        self.logger.info("Wrote %d summary records to %s", len(summary), c["output"])
