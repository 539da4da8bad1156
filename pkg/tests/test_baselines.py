# SPDX-FileCopyrightText: 2026 CPIseq developers
# SPDX-License-Identifier: MIT

import numpy as np
import pytest

from cpiseq.baselines import (
    FiMethod,
    loco,
    loco_analyze,
    pfi,
    pfi_analyze,
    scores_to_records,
)
from cpiseq.cpi import FeatureGroup, holm_adjust
from cpiseq.learners import LossKind, fit, parse_learner_spec
from cpiseq.tabular import Dataset, split


def test_pfi_ranks_relevant_features(linear_dataset: Dataset) -> None:
    train, test = split(linear_dataset, 2 / 3, np.random.default_rng(0))
    model = fit(parse_learner_spec("linear"), train)
    scores = {s.group: s for s in pfi_analyze(model, test, rng=2)}

    assert scores["x1"].method is FiMethod.PFI
    assert scores["x1"].score > scores["x2"].score > 1.0
    assert abs(scores["x3"].score) < 0.1
    assert abs(scores["x4"].score) < 0.1
    assert scores["x1"].p is None


def test_pfi_is_deterministic(linear_dataset: Dataset) -> None:
    model = fit(parse_learner_spec("linear"), linear_dataset)
    group = FeatureGroup.single("x2")
    a = pfi(model, linear_dataset, LossKind.MSE, group, n_permutations=3, rng=4)
    b = pfi(model, linear_dataset, LossKind.MSE, group, n_permutations=3, rng=4)
    assert a == b
    with pytest.raises(ValueError):
        pfi(model, linear_dataset, LossKind.MSE, group, n_permutations=0)


def test_loco_detects_relevant_features(linear_dataset: Dataset) -> None:
    train, test = split(linear_dataset, 2 / 3, np.random.default_rng(0))
    scores = loco_analyze(parse_learner_spec("linear"), train, test, rng=3)
    by_group = {s.group: s for s in scores}

    assert by_group["x1"].method is FiMethod.LOCO
    assert by_group["x1"].p_adjusted is not None and by_group["x1"].p_adjusted < 1e-6
    assert by_group["x2"].p_adjusted is not None and by_group["x2"].p_adjusted < 1e-6
    assert by_group["x1"].score > by_group["x2"].score > 0.5
    assert abs(by_group["x3"].score) < 0.05
    p = [s.p for s in scores]
    assert all(x is not None for x in p)
    assert [s.p_adjusted for s in scores] == pytest.approx(holm_adjust(p))  # type: ignore


def test_single_group_loco(linear_dataset: Dataset) -> None:
    train, test = split(linear_dataset, 2 / 3, np.random.default_rng(0))
    score = loco(
        parse_learner_spec("linear"), train, test, LossKind.MSE, FeatureGroup.single("x1"), rng=0
    )
    assert score.p == score.p_adjusted
    assert score.score > 1.0


def test_loco_needs_a_remaining_feature(linear_dataset: Dataset) -> None:
    ds = linear_dataset.select(["x1"])
    with pytest.raises(ValueError):
        loco_analyze(parse_learner_spec("linear"), ds, ds)


def test_scores_to_records(linear_dataset: Dataset) -> None:
    model = fit(parse_learner_spec("linear"), linear_dataset)
    records = scores_to_records(pfi_analyze(model, linear_dataset, n_permutations=1, rng=0))
    assert [r["group"] for r in records] == ["x1", "x2", "x3", "x4"]
    assert all(r["method"] == "pfi" for r in records)
