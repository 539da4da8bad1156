# SPDX-FileCopyrightText: 2026 CPIseq developers
# SPDX-License-Identifier: MIT

from dataclasses import dataclass

import numpy as np

from ..errors import DataError
from ..rng import RandomLike, as_generator
from ..tabular import Dataset, EncodedMatrix, FloatArray, one_hot_encode, schema_fingerprint
from .forest import RandomForestEstimator
from .learner import Estimator, LearnerKind, LearnerSpec, TaskKind, check_binary
from .linear import LinearEstimator, LogisticEstimator


@dataclass(frozen=True)
class FittedModel:
    spec: LearnerSpec
    task: TaskKind
    estimator: Estimator
    fingerprint: str
    """Fingerprint of the training feature schema."""


def fit(spec: LearnerSpec, train: Dataset, rng: RandomLike = None) -> FittedModel:
    """Fits a learner on the features of `train` against its target."""
    gen, _ = as_generator(rng)
    _, y = train.require_target()
    task = TaskKind.CLASSIFICATION if train.is_classification else TaskKind.REGRESSION
    spec.check_task(task)
    if task is TaskKind.CLASSIFICATION:
        check_binary(y)

    features = train.features()
    X = one_hot_encode(features)
    estimator: Estimator
    match spec.kind:
        case LearnerKind.LINEAR:
            estimator = LinearEstimator.fit(X, y)
        case LearnerKind.LOGISTIC:
            estimator = LogisticEstimator.fit(X, y)
        case LearnerKind.RANDOM_FOREST:
            estimator = RandomForestEstimator.fit(X, y, spec, task, gen)
    return FittedModel(spec, task, estimator, schema_fingerprint(features.schema))


def predict_encoded(model: FittedModel, X: EncodedMatrix) -> FloatArray:
    """Predicts on an already encoded design, e.g. one with knockoff columns swapped in."""
    if schema_fingerprint(X.schema) != model.fingerprint:
        raise DataError("feature schema doesn't match the one the model was trained on")
    pred = model.estimator.predict(X)
    if model.task is TaskKind.CLASSIFICATION:
        pred = np.clip(pred, 0.0, 1.0)
    return pred


def predict(model: FittedModel, ds: Dataset) -> FloatArray:
    return predict_encoded(model, one_hot_encode(ds.features()))


def evaluate(model: FittedModel, test: Dataset) -> dict[str, float]:
    """R² for regression, accuracy at threshold 0.5 for classification."""
    _, y = test.require_target()
    pred = predict(model, test)
    if model.task is TaskKind.CLASSIFICATION:
        return {"accuracy": float(np.mean((pred >= 0.5) == (y == 1.0)))}

    sst = float(np.sum((y - y.mean()) ** 2))
    if sst == 0.0:
        raise DataError("R² is undefined for a constant test target")
    return {"r2": 1.0 - float(np.sum((y - pred) ** 2)) / sst}
