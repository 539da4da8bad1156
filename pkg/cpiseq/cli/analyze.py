# SPDX-FileCopyrightText: 2026 CPIseq developers
# SPDX-License-Identifier: MIT

from pathlib import Path

import numpy as np
from impuls import LocalResource, Resource, Task, TaskRuntime

from ..cpi import DeltaOrientation
from ..errors import DataError
from ..learners import LossKind, evaluate, fit, parse_learner_spec
from ..rng import derive_seeds
from ..tabular import Dataset, split
from .config import RunConfig
from .files import load_dataset, write_records
from .methods import enet_config, learner_for, method_parameters, run_method


def parse_round_filter(text: str) -> tuple[str, str, float]:
    """
    >>> parse_round_filter("x, y, 0.02")
    ('x', 'y', 0.02)
    """
    parts = [i.strip() for i in text.split(",")]
    if len(parts) != 3 or not parts[0] or not parts[1]:
        raise ValueError(f"round filter must look like 'a,b,tol', got {text!r}")
    tolerance = float(parts[2])
    if tolerance <= 0.0:
        raise ValueError("round filter tolerance must be positive")
    return parts[0], parts[1], tolerance


def apply_round_filter(ds: Dataset, a: str, b: str, tolerance: float) -> Dataset:
    """Keeps the rows where two continuous columns differ by less than `tolerance`."""
    for name in (a, b):
        if name not in ds.names:
            raise DataError(f"round filter column {name!r} is not a feature")
        if ds.column_schema(name).is_categorical:
            raise DataError(f"round filter column {name!r} must be continuous")
    keep = np.flatnonzero(np.abs(ds.column(a) - ds.column(b)) < tolerance)
    if keep.shape[0] < 2:
        raise DataError(f"round filter |{a} - {b}| < {tolerance:g} leaves {keep.shape[0]} rows")
    return ds.take(keep)


def analyze_resources(config: RunConfig) -> dict[str, Resource]:
    resources: dict[str, Resource] = {"data.csv": LocalResource(config["data"])}
    if config["schema"]:
        resources["schema.json"] = LocalResource(config["schema"])
    return resources


class RunAnalysis(Task):
    def __init__(self, config: RunConfig) -> None:
        super().__init__()
        self.config = config

    def execute(self, r: TaskRuntime) -> None:
        c = self.config
        schema = r.resources["schema.json"].stored_at if c["schema"] else None
        ds = load_dataset(r.resources["data.csv"].stored_at, schema, c["target"], c["categorical"])
        self.logger.info("Loaded %d rows with %d features", ds.n_rows, ds.n_features)

        if c["round_filter"]:
            ds = apply_round_filter(ds, *parse_round_filter(c["round_filter"]))
            self.logger.info("Round filter %s kept %d rows", c["round_filter"], ds.n_rows)

        split_seed, fit_seed, method_seed = derive_seeds(np.random.default_rng(c.seed), 3)
        train, test = split(ds, c["train_fraction"], np.random.default_rng(split_seed))
        spec = learner_for(c["method"], parse_learner_spec(c["learner"], n_jobs=c.workers))
        model = fit(spec, train, fit_seed)
        performance = evaluate(model, test)
        self.logger.info("Fitted %s on %d rows: %s", spec, train.n_rows, performance)

        loss = LossKind(c["loss"]) if c["loss"] else None
        orientation = DeltaOrientation(c["orientation"])
        enet = enet_config(c)
        outcome = run_method(
            c["method"],
            model,
            train,
            test,
            loss,
            c["alpha"],
            enet,
            rng=method_seed,
            n_permutations=c["permutations"],
            orientation=orientation,
            redraw_per_group=c["redraw_per_group"],
            n_jobs=c.workers,
        )
        if outcome.p_values is not None:
            significant = [g for g, p in outcome.p_values.items() if p <= c["alpha"]]
            self.logger.info("Significant before adjustment: %s", ", ".join(significant) or "-")

        metadata = c.metadata(**method_parameters(c["method"], spec, enet, loss, orientation))
        metadata["n_train"] = train.n_rows
        metadata["n_test"] = test.n_rows
        metadata["performance"] = performance
        write_records(Path(c["output"]), outcome.records, metadata)
        self.logger.info("Wrote %d results to %s", len(outcome.records), c["output"])
