# SPDX-FileCopyrightText: 2026 CPIseq developers
# SPDX-License-Identifier: MIT

from pathlib import Path
from typing import Any

import numpy as np
import pytest

from cpiseq import json
from cpiseq.cli import EXIT_DATA, EXIT_OK, EXIT_USAGE, main
from cpiseq.cli.config import read_config_file
from cpiseq.cli.fetch import install_verified, sha256_of
from cpiseq.cli.files import read_csv_records
from cpiseq.cli.methods import learner_for, run_method
from cpiseq.errors import DataError
from cpiseq.knockoffs import GaussianKnockoffSampler
from cpiseq.learners import CategoricalSplits, fit, parse_learner_spec
from cpiseq.learners.forest import SplitFeatures
from cpiseq.penalized import ElasticNetConfig
from cpiseq.tabular import Dataset, split

BENCHMARK = [
    "benchmark",
    "--scenario",
    "dag",
    "--methods",
    "cpi-gauss,pfi,loco",
    "--learner",
    "linear",
    "--n-list",
    "120",
    "--seed",
    "7",
]


@pytest.fixture(autouse=True)
def in_tmp_path(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> Path:
    monkeypatch.chdir(tmp_path)
    return tmp_path


def read_json(path: str | Path) -> Any:
    with open(path, "rb") as f:
        return json.load_document(f)


def simulate(prefix: str = "sim", *extra: str) -> None:
    argv = ["simulate", "--scenario", "dag", "--n", "300", "--seed", "3", "--output", prefix]
    assert main([*argv, *extra]) == EXIT_OK


def analyze(*extra: str) -> int:
    return main(
        [
            "analyze",
            "--data",
            "sim.csv",
            "--schema",
            "sim.schema.json",
            "--target",
            "Y",
            "--learner",
            "linear",
            *extra,
        ]
    )


def test_simulate_writes_data_schema_and_truth() -> None:
    simulate()
    assert Path("sim.csv").read_text().splitlines()[0] == "X1,X2,X3,X4,Y"
    assert [c["name"] for c in read_json("sim.schema.json")] == ["X1", "X2", "X3", "X4", "Y"]

    truth = read_json("sim.truth.json")
    assert truth["target"] == "Y"
    assert truth["relevant"] == {"X1": False, "X2": False, "X3": True, "X4": True}
    assert truth["metadata"]["seed"] == 3
    assert truth["metadata"]["config"]["n"] == 300


def test_simulate_writes_run_metadata_for_the_data_files() -> None:
    simulate()
    meta = read_json("sim.meta.json")
    assert meta["metadata"]["seed"] == 3
    assert meta["metadata"]["command"] == "simulate"
    assert meta["metadata"]["config"]["scenario"] == "dag"
    assert meta["metadata"]["method"] == {"scenario": "DagScenarioConfig"}
    assert "version" in meta["metadata"]
    assert meta["sha256"] == {
        "sim.csv": sha256_of(Path("sim.csv")),
        "sim.schema.json": sha256_of(Path("sim.schema.json")),
    }
    assert read_json("sim.truth.json")["metadata"] == meta["metadata"]


def test_simulate_grid_classification() -> None:
    argv = ["simulate", "--scenario", "grid", "--task", "classification", "--n", "400"]
    assert main([*argv, "--c", "3", "--output", "grid"]) == EXIT_OK
    truth = read_json("grid.truth.json")
    assert truth["oracle"]["accuracy_star"] == pytest.approx(0.8, abs=1e-3)
    assert "beta_ber" in truth


def test_confounder_classification_is_a_usage_error() -> None:
    argv = ["simulate", "--scenario", "confounder", "--task", "classification"]
    assert main(argv) == EXIT_USAGE


def test_analyze_scores_every_feature() -> None:
    simulate()
    assert analyze("--method", "cpi-gauss", "--seed", "5") == EXIT_OK

    output = read_json("results.json")
    results = {r["group"]: r for r in output["results"]}
    assert list(results) == ["X1", "X2", "X3", "X4"]
    assert results["X4"]["p_adjusted"] < 0.05
    assert output["metadata"]["seed"] == 5
    assert output["metadata"]["method"]["knockoffs"] == {"sampler": "gaussian"}
    assert output["metadata"]["n_train"] + output["metadata"]["n_test"] == 300
    assert "r2" in output["metadata"]["performance"]


def test_cpi_gauss_forest_splits_on_raw_indicators(mixed_dataset: Dataset) -> None:
    rf = parse_learner_spec("rf(trees=5)")
    spec = learner_for("cpi-gauss", rf)
    assert spec.categorical_splits is CategoricalSplits.INDICATOR
    assert learner_for("cpi-seq", rf) == rf
    assert learner_for("cpi-gauss", parse_learner_spec("linear")) == parse_learner_spec("linear")

    knockoffs = GaussianKnockoffSampler().sample(mixed_dataset, 0).encoded
    seen = SplitFeatures.of(knockoffs, spec.categorical_splits).values
    assert np.array_equal(seen, knockoffs.values)
    assert not np.all(np.isin(seen[:, knockoffs.groups["c"]], (0.0, 1.0)))


def test_cpi_gauss_refuses_a_level_order_forest(mixed_dataset: Dataset) -> None:
    train, test = split(mixed_dataset, 0.5, np.random.default_rng(0))
    model = fit(parse_learner_spec("rf(trees=5)"), train, 0)
    with pytest.raises(ValueError, match="splits=indicator"):
        run_method("cpi-gauss", model, train, test, None, 0.05, ElasticNetConfig())


def test_analyze_cpi_gauss_records_indicator_splits() -> None:
    simulate("sim", "--x3-levels", "3")
    assert analyze("--method", "cpi-gauss", "--learner", "rf(trees=10)") == EXIT_OK
    learner = read_json("results.json")["metadata"]["method"]["learner"]
    assert learner == "rf(trees=10,splits=indicator)"


def test_analyze_is_reproducible() -> None:
    simulate()
    assert analyze("--method", "cpi-seq", "--output", "a.json") == EXIT_OK
    first = read_json("a.json")
    assert analyze("--method", "cpi-seq", "--output", "a.json") == EXIT_OK
    assert read_json("a.json") == first


def test_analyze_csv_output_with_inferred_schema() -> None:
    simulate()
    argv = ["analyze", "--data", "sim.csv", "--target", "Y", "--learner", "rf(trees=10)"]
    assert main([*argv, "--method", "pfi", "--output", "pfi.csv"]) == EXIT_OK

    metadata, rows = read_csv_records("pfi.csv")
    assert metadata is not None
    assert metadata["method"]["method"] == "pfi"
    assert [r["group"] for r in rows] == ["X1", "X2", "X3", "X4"]
    assert all(r["p"] == "" for r in rows)


def test_analyze_round_filter() -> None:
    simulate()
    assert analyze("--method", "cpi-gauss", "--round-filter", "X1,X2,1.0") == EXIT_OK
    output = read_json("results.json")
    assert output["metadata"]["n_train"] + output["metadata"]["n_test"] < 300
    assert analyze("--round-filter", "X1,Q,1.0") == EXIT_DATA


def test_unknown_method_is_a_usage_error() -> None:
    simulate()
    assert analyze("--method", "shap") == EXIT_USAGE
    assert main(["analyze", "--data", "sim.csv"]) == EXIT_USAGE


def test_missing_data_file() -> None:
    assert main(["analyze", "--data", "missing.csv", "--target", "Y"]) == EXIT_DATA


def test_config_file_is_overridden_by_flags() -> None:
    simulate()
    Path("run.json").write_text(
        '{"method": "pfi", "learner": "linear", "seed": 11, "permutations": 2}'
    )
    argv = ["--config", "run.json", "--method", "cpi-gauss"]
    assert main(["analyze", *argv, "--data", "sim.csv", "--target", "Y"]) == EXIT_OK

    config = read_json("results.json")["metadata"]["config"]
    assert config["method"] == "cpi-gauss"
    assert config["learner"] == "linear"
    assert config["seed"] == 11
    assert config["permutations"] == 2


def test_malformed_config_file_is_a_data_error() -> None:
    Path("run.json").write_text('{"seed": ')
    argv = ["analyze", "--config", "run.json", "--data", "sim.csv", "--target", "Y"]
    assert main(argv) == EXIT_DATA


def test_config_file_rejects_unknown_options() -> None:
    simulate()
    Path("run.json").write_text('{"trees": 5}')
    argv = ["analyze", "--config", "run.json", "--data", "sim.csv", "--target", "Y"]
    assert main(argv) == EXIT_USAGE


def test_read_config_file_accepts_dashed_keys(tmp_path: Path) -> None:
    path = tmp_path / "c.json"
    path.write_text('{"n-list": [100, 200], "workers": 2}')
    assert read_config_file(str(path)) == {"n_list": [100, 200], "workers": 2}


def summary_table(path: str) -> dict[tuple[str, str, str], float]:
    _, rows = read_csv_records(path)
    return {(r["method"], r["feature"], r["metric"]): float(r["value"]) for r in rows}


def test_benchmark_resumes_from_its_rows() -> None:
    assert main([*BENCHMARK, "--replicates", "2"]) == EXIT_OK
    _, first_rows = read_csv_records("benchmark_rows.csv")
    assert {r["replicate"] for r in first_rows} == {"0", "1"}
    assert len(first_rows) == 2 * 3 * 4

    assert main([*BENCHMARK, "--replicates", "3"]) == EXIT_OK
    _, rows = read_csv_records("benchmark_rows.csv")
    assert rows[: len(first_rows)] == first_rows
    assert {r["replicate"] for r in rows} == {"0", "1", "2"}

    summary = summary_table("benchmark_summary.csv")
    assert summary["pfi", "*", "replicates"] == 3.0
    assert 0.0 <= summary["cpi-gauss", "X4", "rejection_rate"] <= 1.0
    assert ("pfi", "X4", "rejection_rate") not in summary


def test_benchmark_rows_do_not_depend_on_workers(in_tmp_path: Path) -> None:
    for workers in ("1", "2"):
        Path(workers).mkdir()
        rows = f"{workers}/rows.csv"
        argv = ["--replicates", "2", "--workers", workers, "--rows", rows]
        assert main([*BENCHMARK, *argv, "--output", f"{workers}/summary.csv"]) == EXIT_OK
    assert read_csv_records("1/rows.csv")[1] == read_csv_records("2/rows.csv")[1]


def test_benchmark_single_replicate_has_zero_sd() -> None:
    assert main([*BENCHMARK, "--replicates", "1"]) == EXIT_OK
    summary = summary_table("benchmark_summary.csv")
    assert summary["cpi-gauss", "X1", "score_sd"] == 0.0
    assert summary["loco", "*", "auc_sd"] == 0.0

    metadata, _ = read_csv_records("benchmark_summary.csv")
    assert metadata is not None
    assert set(metadata["method"]["methods"]) == {"cpi-gauss", "pfi", "loco"}


def test_benchmark_refuses_foreign_rows() -> None:
    assert main([*BENCHMARK, "--replicates", "1"]) == EXIT_OK
    assert main([*BENCHMARK, "--replicates", "1", "--beta", "1.0"]) == EXIT_DATA


def test_benchmark_rejects_unknown_methods() -> None:
    assert main(["benchmark", "--methods", "cpi-seq,shap", "--n-list", "100"]) == EXIT_USAGE


def test_knockoff_diagnostics_on_a_scenario() -> None:
    argv = ["knockoff-diagnostics", "--scenario", "grid", "--n", "2000", "--sampler", "gaussian"]
    assert main([*argv, "--tolerance", "0.2"]) == EXIT_OK
    report = read_json("diagnostics.json")
    assert report["n_rows"] == 2000
    assert report["metadata"]["method"] == {"sampler": "gaussian"}
    assert report["results"]["max_mean_diff"] < 0.2
    assert report["results"]["tolerance"] == 0.2


def test_knockoff_diagnostics_on_a_csv() -> None:
    simulate()
    argv = ["knockoff-diagnostics", "--data", "sim.csv", "--schema", "sim.schema.json"]
    assert main([*argv, "--target", "Y", "--output", "d.json"]) == EXIT_OK
    assert read_json("d.json")["n_rows"] == 300


def test_install_verified(tmp_path: Path) -> None:
    source = tmp_path / "source.bin"
    source.write_bytes(b"knockoffs\n")
    digest = sha256_of(source)

    target = tmp_path / "out" / "file.bin"
    assert install_verified(source, target, digest.upper()) == digest
    assert target.read_bytes() == b"knockoffs\n"

    with pytest.raises(DataError):
        install_verified(source, target, "0" * 64)
    assert not target.exists()
