# SPDX-FileCopyrightText: 2026 CPIseq developers
# SPDX-License-Identifier: MIT

import re
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from typing import Any

import numpy as np

from ..errors import DataError
from ..tabular import EncodedMatrix, FloatArray


class LearnerKind(Enum):
    LINEAR = "linear"
    LOGISTIC = "logistic"
    RANDOM_FOREST = "random_forest"


class TaskKind(Enum):
    REGRESSION = "regression"
    CLASSIFICATION = "classification"


class CategoricalSplits(Enum):
    LEVEL_ORDER = "level_order"
    """Categorical columns split as a whole, levels ordered by their mean target."""
    INDICATOR = "indicator"
    """Every one-hot indicator is an ordinary numeric feature."""


@dataclass(frozen=True)
class LearnerSpec:
    kind: LearnerKind
    n_trees: int = 500
    mtry: int | None = None
    min_node_size: int | None = None
    bootstrap: bool = True
    categorical_splits: CategoricalSplits = CategoricalSplits.LEVEL_ORDER
    n_jobs: int = 1

    def __post_init__(self) -> None:
        if self.n_trees < 1:
            raise ValueError(f"n_trees must be at least 1, got {self.n_trees}")
        if self.mtry is not None and self.mtry < 1:
            raise ValueError(f"mtry must be at least 1, got {self.mtry}")
        if self.min_node_size is not None and self.min_node_size < 1:
            raise ValueError(f"min_node_size must be at least 1, got {self.min_node_size}")

    def __str__(self) -> str:
        if self.kind is not LearnerKind.RANDOM_FOREST:
            return self.kind.value
        args = [f"trees={self.n_trees}"]
        if self.mtry is not None:
            args.append(f"mtry={self.mtry}")
        if self.min_node_size is not None:
            args.append(f"min_node={self.min_node_size}")
        if not self.bootstrap:
            args.append("bootstrap=false")
        if self.categorical_splits is not CategoricalSplits.LEVEL_ORDER:
            args.append(f"splits={self.categorical_splits.value}")
        return f"rf({','.join(args)})"

    def check_task(self, task: TaskKind) -> None:
        """Checks that this learner can handle the given task."""
        if self.kind is LearnerKind.LINEAR and task is TaskKind.CLASSIFICATION:
            raise DataError("linear learner needs a continuous target, use logistic instead")
        if self.kind is LearnerKind.LOGISTIC and task is TaskKind.REGRESSION:
            raise DataError("logistic learner needs a binary target")


_SPEC_PATTERN = re.compile(r"^\s*([a-z_]+)\s*(?:\((.*)\))?\s*$")
_KIND_ALIASES = {
    "linear": LearnerKind.LINEAR,
    "lm": LearnerKind.LINEAR,
    "logistic": LearnerKind.LOGISTIC,
    "rf": LearnerKind.RANDOM_FOREST,
    "random_forest": LearnerKind.RANDOM_FOREST,
}


def _parse_bool(value: str) -> bool:
    match value.lower():
        case "true" | "yes" | "1":
            return True
        case "false" | "no" | "0":
            return False
        case _:
            raise ValueError(f"not a boolean: {value!r}")


def parse_learner_spec(text: str, n_jobs: int = 1) -> LearnerSpec:
    """Parses a learner description as written on the command line.

    >>> str(parse_learner_spec("rf(trees=50, mtry=2)"))
    'rf(trees=50,mtry=2)'
    >>> parse_learner_spec("logistic").kind
    <LearnerKind.LOGISTIC: 'logistic'>
    >>> parse_learner_spec("rf(splits=indicator)").categorical_splits
    <CategoricalSplits.INDICATOR: 'indicator'>
    """
    m = _SPEC_PATTERN.match(text)
    if not m or m[1] not in _KIND_ALIASES:
        raise ValueError(f"invalid learner spec: {text!r}")
    kind = _KIND_ALIASES[m[1]]
    args = dict[str, Any](n_jobs=n_jobs)

    for item in filter(None, (i.strip() for i in (m[2] or "").split(","))):
        key, sep, value = (i.strip() for i in item.partition("="))
        if not sep or not value:
            raise ValueError(f"invalid learner argument {item!r} in {text!r}")
        if kind is not LearnerKind.RANDOM_FOREST:
            raise ValueError(f"{kind.value} learner takes no arguments")
        match key:
            case "trees" | "n_trees":
                args["n_trees"] = int(value)
            case "mtry":
                args["mtry"] = int(value)
            case "min_node" | "min_node_size":
                args["min_node_size"] = int(value)
            case "bootstrap":
                args["bootstrap"] = _parse_bool(value)
            case "splits" | "categorical_splits":
                args["categorical_splits"] = CategoricalSplits(value)
            case "jobs" | "n_jobs":
                args["n_jobs"] = int(value)
            case _:
                raise ValueError(f"unknown learner argument {key!r} in {text!r}")

    return LearnerSpec(kind, **args)


class Estimator(ABC):
    """Fitted prediction function over a one-hot encoded design."""

    @abstractmethod
    def predict(self, X: EncodedMatrix) -> FloatArray:
        raise NotImplementedError


def check_binary(y: FloatArray) -> None:
    classes = np.unique(y)
    if classes.shape[0] < 2:
        raise DataError("classification target has a single class")
    if not np.all((classes == 0.0) | (classes == 1.0)):
        raise DataError("classification target must be binary 0/1")
