# SPDX-FileCopyrightText: 2026 CPIseq developers
# SPDX-License-Identifier: MIT

"""Desk-scale simulation studies. These take minutes and are deselected by default;
run them with `pytest -m slow`."""

import math
from argparse import Namespace
from typing import Any

import numpy as np
import pytest

from cpiseq.cli.benchmark import outcomes_from_rows, run_replicate
from cpiseq.cli.config import RunConfig, resolve
from cpiseq.evalmetrics import aggregate, records_by_metric, rejection_rate
from cpiseq.learners import evaluate, fit, parse_learner_spec
from cpiseq.simgen import GridScenarioConfig, gen_grid
from cpiseq.tabular import split

pytestmark = pytest.mark.slow


def rate_band(replicates: int, alpha: float = 0.05) -> float:
    return alpha + 3.0 * math.sqrt(alpha * (1.0 - alpha) / replicates)


def benchmark_config(**overrides: Any) -> RunConfig:
    defaults = resolve("benchmark", Namespace())
    return RunConfig("benchmark", {**defaults.values, **overrides})


def run_rows(config: RunConfig, n: int, replicates: int) -> list[dict[str, str]]:
    rows = list[dict[str, str]]()
    for replicate in range(replicates):
        run = run_replicate(config, n, replicate)
        assert run.error is None, run.error
        rows.extend({k: "" if v is None else str(v) for k, v in r.items()} for r in run.rows)
    return rows


def rejection(rows: list[dict[str, str]], method: str, feature: str) -> float:
    p = [float(r["p"]) for r in rows if r["method"] == method and r["feature"] == feature]
    return rejection_rate(p, 0.05)


def test_high_cardinality_dag() -> None:
    config = benchmark_config(
        scenario="dag",
        x1_levels=10,
        x3_levels=10,
        beta=0.5,
        learner="rf(trees=100)",
        methods=("cpi-seq", "cpi-gauss"),
    )
    rows = run_rows(config, 2000, 200)

    for feature in ("X1", "X2"):
        assert rejection(rows, "cpi-seq", feature) <= rate_band(200)
    for feature in ("X3", "X4"):
        assert rejection(rows, "cpi-seq", feature) >= 0.80
    advantage = rejection(rows, "cpi-seq", "X3") - rejection(rows, "cpi-gauss", "X3")
    assert advantage >= 0.15


def test_gaussian_dag() -> None:
    config = benchmark_config(
        scenario="dag", beta=0.9, learner="linear", methods=("cpi-seq", "cpi-gauss")
    )
    rows = run_rows(config, 1000, 100)

    for method in ("cpi-seq", "cpi-gauss"):
        for feature in ("X1", "X2"):
            assert rejection(rows, method, feature) <= rate_band(100)
        for feature in ("X3", "X4"):
            assert rejection(rows, method, feature) >= 0.9


def test_grid_ranking() -> None:
    config = benchmark_config(
        scenario="grid", rho=0.8, c=5, learner="rf(trees=100)", methods=("cpi-seq", "pfi")
    )
    table = records_by_metric(aggregate(outcomes_from_rows(run_rows(config, 2000, 100))))
    cpi_auc = table["grid", 2000, "cpi-seq", "*", "auc_mean"]
    pfi_auc = table["grid", 2000, "pfi", "*", "auc_mean"]

    assert cpi_auc >= 0.90
    assert cpi_auc - pfi_auc >= 0.05
    # X3 is an irrelevant continuous feature correlated with the relevant X4
    pfi_x3 = table["grid", 2000, "pfi", "X3", "top_k_rate"]
    cpi_x3 = table["grid", 2000, "cpi-seq", "X3", "top_k_rate"]
    assert pfi_x3 - cpi_x3 >= 0.2


def test_forest_approaches_the_oracle() -> None:
    data = gen_grid(GridScenarioConfig(n=4000), rng=0)
    train, test = split(data.dataset, 2 / 3, np.random.default_rng(1))
    model = fit(parse_learner_spec("rf(trees=200)"), train, 2)
    r2 = evaluate(model, test)["r2"]
    assert 0.52 <= r2 <= data.oracle()["r2_star"] + 0.05
