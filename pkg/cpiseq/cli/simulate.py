# SPDX-FileCopyrightText: 2026 CPIseq developers
# SPDX-License-Identifier: MIT

from pathlib import Path

from impuls import Task, TaskRuntime

from ..simgen import (
    ConfounderScenarioConfig,
    DagScenarioConfig,
    GridScenarioConfig,
    ScenarioConfig,
    TargetKind,
    generate,
)
from ..tabular import write_csv, write_schema
from .config import RunConfig
from .fetch import sha256_of
from .files import write_json


def scenario_config(config: RunConfig, n: int | None = None) -> ScenarioConfig:
    """Builds the scenario preset named by --scenario, with `n` (or --n) rows."""
    n = n or config.values.get("n")
    sized = {"n": n} if n else {}
    task = TargetKind(config["task"])
    match config["scenario"]:
        case "dag":
            return DagScenarioConfig(
                **sized,
                beta=config["beta"],
                x1_levels=config["x1_levels"],
                x3_levels=config["x3_levels"],
                all_levels=config["all_levels"],
                target=task,
            )
        case "grid":
            return GridScenarioConfig(
                **sized,
                rho=config["rho"],
                levels=config["c"],
                target=task,
                snr=config["snr"],
                ber=config["ber"],
            )
        case "confounder":
            if task is not TargetKind.REGRESSION:
                raise ValueError("the confounder scenario only has a regression target")
            return ConfounderScenarioConfig(**sized, strength=config["strength"])
        case other:
            raise ValueError(f"unknown scenario: {other!r}")


class Simulate(Task):
    """Writes one generated dataset as `<prefix>.csv` and `<prefix>.schema.json`, their run
    metadata and digests as `<prefix>.meta.json`, and the ground truth as
    `<prefix>.truth.json`."""

    def __init__(self, config: RunConfig) -> None:
        super().__init__()
        self.config = config

    def execute(self, r: TaskRuntime) -> None:
        c = self.config
        scenario = scenario_config(c)
        data = generate(scenario, c.seed)
        ds = data.dataset
        self.logger.info(
            "Generated %s scenario: %d rows, %d features", c["scenario"], ds.n_rows, ds.n_features
        )

        prefix = c["output"]
        write_csv(ds, f"{prefix}.csv")
        schema = list(ds.schema)
        if ds.target_schema is not None:
            schema.append(ds.target_schema)
        write_schema(schema, f"{prefix}.schema.json")
        metadata = c.metadata(scenario=type(scenario).__name__)
        data_files = [Path(f"{prefix}.csv"), Path(f"{prefix}.schema.json")]
        write_json(
            f"{prefix}.meta.json",
            {"metadata": metadata, "sha256": {p.name: sha256_of(p) for p in data_files}},
        )
        write_json(
            f"{prefix}.truth.json",
            {
                "metadata": metadata,
                "target": ds.target_schema.name if ds.target_schema else None,
                **data.truth_json(),
            },
        )
        relevant = [k for k, v in data.relevant.items() if v]
        self.logger.info("Relevant features: %s", ", ".join(relevant))
