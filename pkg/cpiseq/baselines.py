# SPDX-FileCopyrightText: 2026 CPIseq developers
# SPDX-License-Identifier: MIT

"""Comparison importance measures: permutation feature importance (marginal) and
leave-one-covariate-out refitting."""

from collections.abc import Iterable
from dataclasses import dataclass
from enum import Enum
from typing import Any

import numpy as np
from joblib import Parallel, delayed

from .cpi import FeatureGroup, check_groups, default_groups, holm_adjust, paired_t_test_one_sided
from .learners import (
    FittedModel,
    LearnerSpec,
    LossKind,
    default_loss,
    fit,
    instance_loss,
    predict,
    predict_encoded,
)
from .rng import RandomLike, as_generator, derive_seeds
from .tabular import Dataset, FloatArray, one_hot_encode


class FiMethod(Enum):
    PFI = "pfi"
    LOCO = "loco"


@dataclass(frozen=True)
class FiScore:
    group: str
    score: float
    method: FiMethod
    t: float | None = None
    p: float | None = None
    p_adjusted: float | None = None

    def to_json(self) -> dict[str, Any]:
        t = self.t if self.t is None or np.isfinite(self.t) else None
        return {
            "method": self.method.value,
            "group": self.group,
            "score": self.score,
            "t": t,
            "p": self.p,
            "p_adjusted": self.p_adjusted,
        }


def pfi(
    model: FittedModel,
    test: Dataset,
    loss: LossKind,
    group: FeatureGroup,
    n_permutations: int = 5,
    rng: RandomLike = None,
) -> FiScore:
    """Mean loss increase after jointly permuting the rows of the group's columns on
    the test set, averaged over `n_permutations` repeats."""
    if n_permutations < 1:
        raise ValueError("n_permutations must be at least 1")
    gen, _ = as_generator(rng)
    _, y = test.require_target()
    X = one_hot_encode(test.features())
    idx = X.columns_of(group.columns)
    original = float(instance_loss(loss, predict_encoded(model, X), y).mean())

    increases = list[float]()
    for _ in range(n_permutations):
        values = np.array(X.values)
        values[:, idx] = X.values[gen.permutation(X.n_rows)][:, idx]
        permuted = instance_loss(loss, predict_encoded(model, X.with_values(values)), y)
        increases.append(float(permuted.mean()) - original)
    return FiScore(group.id, float(np.mean(increases)), FiMethod.PFI)


def _loco_delta(
    spec: LearnerSpec,
    train: Dataset,
    test: Dataset,
    loss: LossKind,
    group: FeatureGroup,
    full_model: FittedModel,
    seed: int,
) -> FloatArray:
    reduced_train = train.drop(group.columns)
    if reduced_train.n_features == 0:
        raise ValueError(f"leaving out {group.id!r} leaves no features to refit on")
    reduced = fit(spec, reduced_train, seed)
    _, y = test.require_target()
    full_loss = instance_loss(loss, predict(full_model, test), y)
    reduced_loss = instance_loss(loss, predict(reduced, test.drop(group.columns)), y)
    return reduced_loss - full_loss


def loco(
    spec: LearnerSpec,
    train: Dataset,
    test: Dataset,
    loss: LossKind,
    group: FeatureGroup,
    alpha: float = 0.05,
    rng: RandomLike = None,
    full_model: FittedModel | None = None,
) -> FiScore:
    """Refits without the group; scores the mean per-row loss increase of the reduced
    model with a one-sided paired t-test."""
    gen, _ = as_generator(rng)
    full_seed, reduced_seed = derive_seeds(gen, 2)
    full_model = full_model or fit(spec, train, full_seed)
    delta = _loco_delta(spec, train, test, loss, group, full_model, reduced_seed)
    test_result = paired_t_test_one_sided(delta, alpha)
    return FiScore(
        group.id, float(delta.mean()), FiMethod.LOCO, test_result.t, test_result.p, test_result.p
    )


def pfi_analyze(
    model: FittedModel,
    test: Dataset,
    loss: LossKind | None = None,
    groups: Iterable[FeatureGroup] | None = None,
    n_permutations: int = 5,
    rng: RandomLike = None,
    n_jobs: int = 1,
) -> list[FiScore]:
    gen, _ = as_generator(rng)
    loss_kind = loss or default_loss(model.task)
    group_list = check_groups(groups if groups is not None else default_groups(test), test)
    seeds = derive_seeds(gen, len(group_list))
    return Parallel(n_jobs=n_jobs, prefer="threads")(
        delayed(pfi)(model, test, loss_kind, g, n_permutations, s)
        for g, s in zip(group_list, seeds)
    )


def loco_analyze(
    spec: LearnerSpec,
    train: Dataset,
    test: Dataset,
    loss: LossKind | None = None,
    groups: Iterable[FeatureGroup] | None = None,
    alpha: float = 0.05,
    rng: RandomLike = None,
    full_model: FittedModel | None = None,
    n_jobs: int = 1,
) -> list[FiScore]:
    """LOCO over many groups: the full model is fitted once, every reduced model gets
    its own derived seed, and p-values are Holm-adjusted across the groups."""
    gen, _ = as_generator(rng)
    group_list = check_groups(groups if groups is not None else default_groups(train), train)
    full_seed, *seeds = derive_seeds(gen, len(group_list) + 1)
    full_model = full_model or fit(spec, train, full_seed)
    loss_kind = loss or default_loss(full_model.task)

    deltas = Parallel(n_jobs=n_jobs)(
        delayed(_loco_delta)(spec, train, test, loss_kind, g, full_model, s)
        for g, s in zip(group_list, seeds)
    )
    tests = [paired_t_test_one_sided(d, alpha) for d in deltas]
    adjusted = holm_adjust([t.p for t in tests])
    return [
        FiScore(g.id, float(d.mean()), FiMethod.LOCO, t.t, t.p, p_adj)
        for g, d, t, p_adj in zip(group_list, deltas, tests, adjusted)
    ]


def scores_to_records(scores: Iterable[FiScore]) -> list[dict[str, Any]]:
    return [s.to_json() for s in scores]
