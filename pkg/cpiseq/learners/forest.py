# SPDX-FileCopyrightText: 2026 CPIseq developers
# SPDX-License-Identifier: MIT

"""Random forest of CART trees on mixed data.

Trees are grown on bootstrap samples with `mtry` candidate features per node. For a
0/1 target the Gini decrease and the variance decrease pick the same split, so both
tasks maximize S_L^2 / n_L + S_R^2 / n_R (S = sum of targets in a child). Leaves store
the mean target, which is the class-1 probability for classification.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import numpy.typing as npt
from joblib import Parallel, delayed

from ..rng import derive_seeds
from ..tabular import EncodedMatrix, FloatArray, IntArray
from .learner import CategoricalSplits, Estimator, LearnerSpec, TaskKind

BoolArray = npt.NDArray[np.bool_]


@dataclass(frozen=True)
class SplitFeatures:
    """Columns the trees split on: whole categorical columns (as level indices)
    or the raw one-hot indicators."""

    values: FloatArray
    is_categorical: BoolArray
    n_levels: IntArray

    @property
    def width(self) -> int:
        return int(self.values.shape[1])

    @classmethod
    def of(cls, X: EncodedMatrix, splits: CategoricalSplits) -> "SplitFeatures":
        if splits is CategoricalSplits.INDICATOR or not X.schema:
            return cls(X.values, np.zeros(X.width, dtype=bool), np.zeros(X.width, dtype=np.int64))

        columns = list[FloatArray]()
        n_levels = list[int]()
        for col in X.schema:
            s = X.groups[col.name]
            if col.is_categorical:
                columns.append(np.argmax(X.values[:, s], axis=1).astype(np.float64))
                n_levels.append(len(col.levels))
            else:
                columns.append(X.values[:, s.start])
                n_levels.append(0)
        values = np.column_stack(columns) if columns else np.zeros((X.n_rows, 0))
        levels = np.array(n_levels, dtype=np.int64)
        return cls(values, levels > 0, levels)


class _Split(NamedTuple):
    score: float
    threshold: float
    left_levels: BoolArray | None
    go_left: BoolArray


def _best_numeric_split(x: FloatArray, y: FloatArray) -> _Split | None:
    order = np.argsort(x, kind="stable")
    xs, ys = x[order], y[order]
    n = xs.shape[0]
    valid = xs[1:] > xs[:-1]
    if not valid.any():
        return None

    left_sum = np.cumsum(ys)[:-1]
    left_n = np.arange(1, n)
    score = left_sum**2 / left_n + (ys.sum() - left_sum) ** 2 / (n - left_n)
    b = int(np.argmax(np.where(valid, score, -np.inf)))

    threshold = 0.5 * (xs[b] + xs[b + 1])
    if threshold >= xs[b + 1]:
        threshold = xs[b]
    return _Split(float(score[b]), float(threshold), None, x <= threshold)


def _best_categorical_split(x: FloatArray, y: FloatArray, n_levels: int) -> _Split | None:
    # Levels ordered by mean target; the best binary partition is a prefix of that order.
    levels = x.astype(np.int64)
    counts = np.bincount(levels, minlength=n_levels)
    sums = np.bincount(levels, weights=y, minlength=n_levels)
    present = np.flatnonzero(counts)
    if present.shape[0] < 2:
        return None

    order = present[np.argsort(sums[present] / counts[present], kind="stable")]
    left_n = np.cumsum(counts[order])[:-1]
    left_sum = np.cumsum(sums[order])[:-1]
    n = x.shape[0]
    score = left_sum**2 / left_n + (y.sum() - left_sum) ** 2 / (n - left_n)
    b = int(np.argmax(score))

    left_levels = np.zeros(n_levels, dtype=bool)
    left_levels[order[: b + 1]] = True
    return _Split(float(score[b]), np.nan, left_levels, left_levels[levels])


@dataclass(frozen=True)
class Tree:
    """Flat-array binary tree; leaves have `feature == -1`."""

    feature: IntArray
    threshold: FloatArray
    left: IntArray
    right: IntArray
    value: FloatArray
    left_levels: BoolArray

    @property
    def n_nodes(self) -> int:
        return int(self.feature.shape[0])

    def predict(self, F: SplitFeatures) -> FloatArray:
        n = F.values.shape[0]
        node = np.zeros(n, dtype=np.int64)
        active = np.flatnonzero(self.feature[node] >= 0)
        max_level = self.left_levels.shape[1] - 1
        while active.shape[0]:
            at = node[active]
            f = self.feature[at]
            x = F.values[active, f]
            categorical = F.is_categorical[f]
            level = np.zeros(x.shape[0], dtype=np.int64)
            level[categorical] = np.clip(x[categorical].astype(np.int64), 0, max_level)
            go_left = np.where(
                categorical,
                self.left_levels[at, level],
                x <= self.threshold[at],
            )
            node[active] = np.where(go_left, self.left[at], self.right[at])
            active = active[self.feature[node[active]] >= 0]
        return self.value[node]


def grow_tree(
    F: SplitFeatures,
    y: FloatArray,
    mtry: int,
    min_node_size: int,
    bootstrap: bool,
    seed: int,
) -> Tree:
    rng = np.random.default_rng(seed)
    n, m = F.values.shape
    rows = rng.integers(0, n, size=n) if bootstrap else np.arange(n)
    max_levels = max(1, int(F.n_levels.max()) if m else 1)

    feature = list[int]()
    threshold = list[float]()
    left = list[int]()
    right = list[int]()
    value = list[float]()
    left_levels = list[BoolArray]()

    def add_node(idx: IntArray) -> int:
        feature.append(-1)
        threshold.append(np.nan)
        left.append(-1)
        right.append(-1)
        value.append(float(y[idx].mean()))
        left_levels.append(np.zeros(max_levels, dtype=bool))
        return len(feature) - 1

    stack = [(add_node(rows), rows)]
    while stack:
        node, idx = stack.pop()
        y_node = y[idx]
        if idx.shape[0] <= min_node_size or m == 0 or y_node.min() == y_node.max():
            continue

        best: _Split | None = None
        best_feature = -1
        for f in rng.choice(m, size=mtry, replace=False):
            x = F.values[idx, f]
            if F.is_categorical[f]:
                candidate = _best_categorical_split(x, y_node, int(F.n_levels[f]))
            else:
                candidate = _best_numeric_split(x, y_node)
            if candidate is not None and (best is None or candidate.score > best.score):
                best, best_feature = candidate, int(f)
        if best is None:
            continue

        feature[node] = best_feature
        threshold[node] = best.threshold
        if best.left_levels is not None:
            left_levels[node][: best.left_levels.shape[0]] = best.left_levels
        left_idx, right_idx = idx[best.go_left], idx[~best.go_left]
        left[node] = add_node(left_idx)
        right[node] = add_node(right_idx)
        stack.append((left[node], left_idx))
        stack.append((right[node], right_idx))

    return Tree(
        np.array(feature, dtype=np.int64),
        np.array(threshold),
        np.array(left, dtype=np.int64),
        np.array(right, dtype=np.int64),
        np.array(value),
        np.array(left_levels, dtype=bool).reshape(len(feature), max_levels),
    )


def default_mtry(width: int, task: TaskKind) -> int:
    """
    >>> default_mtry(10, TaskKind.CLASSIFICATION), default_mtry(10, TaskKind.REGRESSION)
    (3, 3)
    >>> default_mtry(2, TaskKind.REGRESSION)
    1
    """
    if task is TaskKind.CLASSIFICATION:
        return max(1, int(np.floor(np.sqrt(width))))
    return max(1, width // 3)


def default_min_node_size(task: TaskKind) -> int:
    return 1 if task is TaskKind.CLASSIFICATION else 5


class RandomForestEstimator(Estimator):
    def __init__(self, trees: list[Tree], splits: CategoricalSplits) -> None:
        self.trees = trees
        self.splits = splits

    @classmethod
    def fit(
        cls,
        X: EncodedMatrix,
        y: FloatArray,
        spec: LearnerSpec,
        task: TaskKind,
        rng: np.random.Generator,
    ) -> "RandomForestEstimator":
        F = SplitFeatures.of(X, spec.categorical_splits)
        mtry = spec.mtry if spec.mtry is not None else default_mtry(F.width, task)
        if F.width and mtry > F.width:
            raise ValueError(f"mtry={mtry} exceeds the {F.width} available split features")
        mtry = min(mtry, F.width)
        min_node_size = spec.min_node_size or default_min_node_size(task)

        seeds = derive_seeds(rng, spec.n_trees)
        trees = Parallel(n_jobs=spec.n_jobs)(
            delayed(grow_tree)(F, y, mtry, min_node_size, spec.bootstrap, seed) for seed in seeds
        )
        return cls([t for t in trees if t is not None], spec.categorical_splits)

    def predict(self, X: EncodedMatrix) -> FloatArray:
        F = SplitFeatures.of(X, self.splits)
        total = np.zeros(X.n_rows)
        for tree in self.trees:
            total += tree.predict(F)
        return total / len(self.trees)
