# SPDX-FileCopyrightText: 2026 CPIseq developers
# SPDX-License-Identifier: MIT

import numpy as np
import pytest

from cpiseq.errors import DataError
from cpiseq.learners import (
    CategoricalSplits,
    LearnerKind,
    LearnerSpec,
    LossKind,
    TaskKind,
    default_loss,
    evaluate,
    fit,
    instance_loss,
    parse_learner_spec,
    predict,
)
from cpiseq.learners.linear import LogisticEstimator
from cpiseq.tabular import ColumnSchema, Dataset, split


@pytest.fixture
def binary_dataset() -> Dataset:
    gen = np.random.default_rng(4)
    n = 400
    X = gen.normal(size=(n, 2))
    y = (gen.random(n) < 1.0 / (1.0 + np.exp(-3.0 * X[:, 0]))).astype(np.float64)
    return Dataset(
        (ColumnSchema.continuous("a"), ColumnSchema.continuous("b")),
        X,
        ColumnSchema.categorical("y", ("0", "1")),
        y,
    )


def test_parse_learner_spec() -> None:
    spec = parse_learner_spec("random_forest(trees=20, min_node=3, bootstrap=no)", n_jobs=4)
    assert spec == LearnerSpec(
        LearnerKind.RANDOM_FOREST, n_trees=20, min_node_size=3, bootstrap=False, n_jobs=4
    )
    assert str(spec) == "rf(trees=20,min_node=3,bootstrap=false)"
    assert parse_learner_spec("lm").kind is LearnerKind.LINEAR


@pytest.mark.parametrize(
    "text", ["svm", "linear(trees=3)", "rf(depth=3)", "rf(trees)", "rf(mtry=0)"]
)
def test_parse_learner_spec_rejects(text: str) -> None:
    with pytest.raises(ValueError):
        parse_learner_spec(text)


def test_learner_task_mismatch(binary_dataset: Dataset, linear_dataset: Dataset) -> None:
    with pytest.raises(DataError):
        fit(parse_learner_spec("linear"), binary_dataset)
    with pytest.raises(DataError):
        fit(parse_learner_spec("logistic"), linear_dataset)


def test_linear_model(linear_dataset: Dataset) -> None:
    train, test = split(linear_dataset, 2 / 3, np.random.default_rng(0))
    model = fit(parse_learner_spec("linear"), train)
    assert model.task is TaskKind.REGRESSION
    assert evaluate(model, test)["r2"] > 0.9


def test_prediction_checks_schema(linear_dataset: Dataset) -> None:
    model = fit(parse_learner_spec("linear"), linear_dataset)
    with pytest.raises(DataError):
        predict(model, linear_dataset.drop(["x4"]))


def test_logistic_model(binary_dataset: Dataset) -> None:
    train, test = split(binary_dataset, 2 / 3, np.random.default_rng(0))
    model = fit(parse_learner_spec("logistic"), train)
    assert model.task is TaskKind.CLASSIFICATION
    assert isinstance(model.estimator, LogisticEstimator)
    assert model.estimator.converged
    assert model.estimator.coefficients[1] == pytest.approx(3.0, abs=1.0)
    assert evaluate(model, test)["accuracy"] > 0.75


def test_forest_regression(linear_dataset: Dataset) -> None:
    train, test = split(linear_dataset, 2 / 3, np.random.default_rng(0))
    model = fit(parse_learner_spec("rf(trees=40)"), train, 3)
    assert evaluate(model, test)["r2"] > 0.6


def test_forest_is_deterministic_across_jobs(mixed_dataset: Dataset) -> None:
    a = fit(parse_learner_spec("rf(trees=10)"), mixed_dataset, 5)
    b = fit(parse_learner_spec("rf(trees=10)", n_jobs=2), mixed_dataset, 5)
    assert np.array_equal(predict(a, mixed_dataset), predict(b, mixed_dataset))


def test_single_unbagged_tree_interpolates(linear_dataset: Dataset) -> None:
    spec = LearnerSpec(
        LearnerKind.RANDOM_FOREST, n_trees=1, mtry=4, min_node_size=1, bootstrap=False
    )
    model = fit(spec, linear_dataset, 0)
    assert np.allclose(predict(model, linear_dataset), linear_dataset.require_target()[1])


@pytest.mark.parametrize("splits", list(CategoricalSplits))
def test_forest_categorical_splits(mixed_dataset: Dataset, splits: CategoricalSplits) -> None:
    spec = LearnerSpec(LearnerKind.RANDOM_FOREST, n_trees=30, categorical_splits=splits)
    train, test = split(mixed_dataset, 2 / 3, np.random.default_rng(1))
    assert evaluate(fit(spec, train, 0), test)["r2"] > 0.4


def test_forest_classification_probabilities(binary_dataset: Dataset) -> None:
    model = fit(parse_learner_spec("rf(trees=20)"), binary_dataset, 0)
    p = predict(model, binary_dataset)
    assert np.all((p >= 0.0) & (p <= 1.0))
    assert evaluate(model, binary_dataset)["accuracy"] > 0.8


def test_instance_loss_clips_log_loss() -> None:
    loss = instance_loss(LossKind.LOG_LOSS, [0.0, 1.0], [1.0, 1.0])
    assert np.all(np.isfinite(loss))
    assert loss[1] == pytest.approx(0.0, abs=1e-9)
    with pytest.raises(ValueError):
        instance_loss(LossKind.MSE, [1.0], [1.0, 2.0])


def test_default_loss() -> None:
    assert default_loss(TaskKind.REGRESSION) is LossKind.MSE
    assert default_loss(TaskKind.CLASSIFICATION) is LossKind.LOG_LOSS


def test_evaluate_rejects_constant_target(linear_dataset: Dataset) -> None:
    model = fit(parse_learner_spec("linear"), linear_dataset)
    constant = linear_dataset.with_target(ColumnSchema.continuous("y"), np.ones(600))
    with pytest.raises(DataError):
        evaluate(model, constant)


def test_single_class_target_is_rejected(binary_dataset: Dataset) -> None:
    schema, _ = binary_dataset.require_target()
    ds = binary_dataset.with_target(schema, np.zeros(binary_dataset.n_rows))
    with pytest.raises(DataError):
        fit(parse_learner_spec("logistic"), ds)


def test_linear_predictions_ignore_redundant_features(linear_dataset: Dataset) -> None:
    spec = parse_learner_spec("linear")
    expected = predict(fit(spec, linear_dataset), linear_dataset)

    extra = (ColumnSchema.continuous("x1_twin"), ColumnSchema.continuous("constant"))
    cells = np.column_stack(
        [linear_dataset.cells, linear_dataset.column("x1"), np.full(linear_dataset.n_rows, 3.0)]
    )
    assert linear_dataset.target_schema is not None
    extended = Dataset(
        (*linear_dataset.schema, *extra),
        cells,
        linear_dataset.target_schema,
        linear_dataset.target,
    )
    assert np.allclose(predict(fit(spec, extended), extended), expected, atol=1e-8)


def test_forest_ignores_level_labels(mixed_dataset: Dataset) -> None:
    # p, q, r become levels 1, 2, 0 of (r, p, q)
    relabel = np.array([1.0, 2.0, 0.0])
    j = mixed_dataset.index_of("c")
    cells = np.array(mixed_dataset.cells)
    cells[:, j] = relabel[cells[:, j].astype(np.int64)]
    a, b, _ = mixed_dataset.schema
    assert mixed_dataset.target_schema is not None
    relabeled = Dataset(
        (a, b, ColumnSchema.categorical("c", ("r", "p", "q"))),
        cells,
        mixed_dataset.target_schema,
        mixed_dataset.target,
    )

    spec = parse_learner_spec("rf(trees=20)")
    original = predict(fit(spec, mixed_dataset, 4), mixed_dataset)
    assert np.allclose(predict(fit(spec, relabeled, 4), relabeled), original, atol=1e-12)
