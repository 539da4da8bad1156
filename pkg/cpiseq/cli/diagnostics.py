# SPDX-FileCopyrightText: 2026 CPIseq developers
# SPDX-License-Identifier: MIT

from pathlib import Path

from impuls import LocalResource, Resource, Task, TaskRuntime

from ..knockoffs import get_sampler, knockoff_diagnostics
from ..simgen import generate
from ..tabular import Dataset, one_hot_encode
from .config import RunConfig
from .files import load_dataset, write_json
from .methods import enet_config
from .simulate import scenario_config


def diagnostics_resources(config: RunConfig) -> dict[str, Resource]:
    resources = dict[str, Resource]()
    if config["data"]:
        resources["data.csv"] = LocalResource(config["data"])
        if config["schema"]:
            resources["schema.json"] = LocalResource(config["schema"])
    return resources


class KnockoffDiagnosticsReport(Task):
    """Draws knockoffs for a dataset (a CSV, or a simulated scenario when no data is
    given) and reports how far their first and second moments are from the originals."""

    def __init__(self, config: RunConfig) -> None:
        super().__init__()
        self.config = config

    def execute(self, r: TaskRuntime) -> None:
        c = self.config
        features = self.load(r).features()
        sampler = get_sampler(c["sampler"], enet_config(c))
        knockoffs = sampler.sample(features, c.seed)
        report = knockoff_diagnostics(one_hot_encode(features), knockoffs, c["tolerance"])

        if report.flagged:
            self.logger.warning(
                "Knockoffs exceed the %g tolerance: mean %.4f, cov %.4f, cross-cov %.4f",
                report.tolerance,
                report.max_mean_diff,
                report.max_cov_diff,
                report.max_cross_cov_diff,
            )
        else:
            self.logger.info("Knockoff moments within %g of the originals", report.tolerance)

        write_json(
            Path(c["output"]),
            {
                "metadata": c.metadata(**sampler.describe()),
                "n_rows": features.n_rows,
                "results": report.to_json(),
            },
        )

    def load(self, r: TaskRuntime) -> Dataset:
        c = self.config
        if c["data"]:
            schema = r.resources["schema.json"].stored_at if c["schema"] else None
            data = r.resources["data.csv"].stored_at
            return load_dataset(data, schema, c["target"], c["categorical"])
        self.logger.info("No data given, simulating the %s scenario", c["scenario"])
        return generate(scenario_config(c), c.seed).dataset
