# SPDX-FileCopyrightText: 2026 CPIseq developers
# SPDX-License-Identifier: MIT

import pytest

from cpiseq.evalmetrics import (
    ReplicateOutcome,
    aggregate,
    auc_rank,
    records_by_metric,
    rejection_rate,
    summarize_values,
    top_k_detection,
    validate_model,
)

FEATURES = ("X1", "X2", "X3", "X4")
RELEVANT = (True, True, False, False)


def outcome(replicate: int, scores: tuple[float, ...], **kwargs: object) -> ReplicateOutcome:
    return ReplicateOutcome(
        scenario="dag",
        n=100,
        method="cpi-seq",
        replicate=replicate,
        features=FEATURES,
        scores=scores,
        relevant=RELEVANT,
        **kwargs,  # type: ignore
    )


def test_auc_rank() -> None:
    assert auc_rank([3, 1, 2, 0], RELEVANT) == 0.75
    assert auc_rank([4, 3, 2, 1], RELEVANT) == 1.0
    assert auc_rank([1, 1, 1, 1], RELEVANT) == 0.5
    with pytest.raises(ValueError):
        auc_rank([1, 2], [True, True])


def test_top_k_detection_breaks_ties_by_index() -> None:
    assert top_k_detection([1, 1, 1, 1], RELEVANT, k=2) == (1.0, 0.0)
    assert top_k_detection([1, 1, 1, 1], (False, False, True, True), k=2) == (0.0, 1.0)
    assert top_k_detection([0, 5, 4, 1], RELEVANT, k=2) == (0.5, 0.5)
    with pytest.raises(ValueError):
        top_k_detection([1, 2, 3, 4], RELEVANT, k=4)


def test_rejection_rate() -> None:
    assert rejection_rate([0.01, 0.05, 0.2, 0.9]) == 0.5
    with pytest.raises(ValueError):
        rejection_rate([])
    with pytest.raises(ValueError):
        rejection_rate([1.2])


def test_summarize_values() -> None:
    s = summarize_values([1.0, 2.0, 3.0, 4.0, 5.0])
    assert s.mean == 3.0
    assert s.median == 3.0
    assert s.count == 5
    assert s.q05 < s.q25 < s.median < s.q75 < s.q95
    assert summarize_values([7.0]).sd == 0.0
    with pytest.raises(ValueError):
        summarize_values([])


def test_validate_model_is_signed() -> None:
    assert validate_model(0.6, 0.7) == pytest.approx(-0.1)


def test_outcome_checks_lengths() -> None:
    with pytest.raises(ValueError):
        outcome(0, (1.0, 2.0))
    with pytest.raises(ValueError):
        outcome(0, (1.0, 2.0, 3.0, 4.0), p_values=(0.1,))


def test_aggregate() -> None:
    outcomes = [
        outcome(0, (4.0, 3.0, 2.0, 1.0), p_values=(0.001, 0.01, 0.5, 0.9)),
        outcome(1, (3.0, 1.0, 2.0, 0.0), p_values=(0.01, 0.2, 0.03, 0.7)),
    ]
    table = records_by_metric(aggregate(outcomes, alpha=0.05))
    key = ("dag", 100, "cpi-seq")

    assert table[(*key, "X1", "score_mean")] == 3.5
    assert table[(*key, "X1", "rejection_rate")] == 1.0
    assert table[(*key, "X2", "rejection_rate")] == 0.5
    assert table[(*key, "X3", "rejection_rate")] == 0.5
    assert table[(*key, "X4", "rejection_rate")] == 0.0
    assert table[(*key, "*", "auc_mean")] == pytest.approx(0.875)
    assert table[(*key, "*", "sensitivity")] == 0.75
    assert table[(*key, "*", "one_minus_specificity")] == 0.25
    assert table[(*key, "X3", "top_k_rate")] == 0.5
    assert table[(*key, "*", "replicates")] == 2.0


def test_aggregate_single_replicate_has_zero_sd() -> None:
    table = records_by_metric(
        aggregate([outcome(0, (4.0, 3.0, 2.0, 1.0), model_value=0.5, oracle_value=0.6)])
    )
    key = ("dag", 100, "cpi-seq")
    assert table[(*key, "X1", "score_sd")] == 0.0
    assert table[(*key, "*", "auc_sd")] == 0.0
    assert table[(*key, "*", "validation_mean")] == pytest.approx(-0.1)
    assert (*key, "X1", "rejection_rate") not in table


def test_aggregate_separates_cells() -> None:
    a = outcome(0, (4.0, 3.0, 2.0, 1.0))
    b = ReplicateOutcome("dag", 200, "pfi", 0, FEATURES, (1.0, 2.0, 3.0, 4.0), RELEVANT)
    table = records_by_metric(aggregate([b, a]))
    assert table[("dag", 100, "cpi-seq", "*", "auc_mean")] == 1.0
    assert table[("dag", 200, "pfi", "*", "auc_mean")] == 0.0


def test_aggregate_rejects_inconsistent_features() -> None:
    a = outcome(0, (4.0, 3.0, 2.0, 1.0))
    b = ReplicateOutcome("dag", 100, "cpi-seq", 1, ("A", "B"), (1.0, 2.0), (True, False))
    with pytest.raises(ValueError):
        aggregate([a, b])
    with pytest.raises(ValueError):
        aggregate([])
