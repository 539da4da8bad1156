# SPDX-FileCopyrightText: 2026 CPIseq developers
# SPDX-License-Identifier: MIT

"""Evaluation of importance methods over simulation replicates: rejection rates, top-k
detection, ranking AUC and model-validation summaries, aggregated to long-format rows."""

from collections import defaultdict
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np
import numpy.typing as npt
from scipy import stats

TIE_RULE = "mann-whitney, ties count 1/2; top-k ties broken by feature index"


@dataclass(frozen=True)
class ReplicateOutcome:
    scenario: str
    n: int
    method: str
    replicate: int
    features: tuple[str, ...]
    scores: tuple[float, ...]
    relevant: tuple[bool, ...]
    p_values: tuple[float, ...] | None = None
    model_value: float | None = None
    oracle_value: float | None = None

    def __post_init__(self) -> None:
        k = len(self.features)
        if len(self.scores) != k or len(self.relevant) != k:
            raise ValueError("scores and relevance flags must match the feature count")
        if self.p_values is not None and len(self.p_values) != k:
            raise ValueError("p-values must match the feature count")


@dataclass(frozen=True)
class Summary:
    mean: float
    sd: float
    q05: float
    q25: float
    median: float
    q75: float
    q95: float
    count: int

    def to_json(self) -> dict[str, float]:
        return {
            "mean": self.mean,
            "sd": self.sd,
            "q05": self.q05,
            "q25": self.q25,
            "median": self.median,
            "q75": self.q75,
            "q95": self.q95,
            "count": self.count,
        }


def summarize_values(values: npt.ArrayLike) -> Summary:
    """Violin-style summary; a single value has sd 0.

    >>> s = summarize_values([-0.1, 0.1])
    >>> round(s.mean, 12), round(s.sd, 4)
    (0.0, 0.1414)
    """
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        raise ValueError("can't summarize an empty sample")
    q = np.quantile(v, [0.05, 0.25, 0.5, 0.75, 0.95])
    sd = float(v.std(ddof=1)) if v.size > 1 else 0.0
    return Summary(float(v.mean()), sd, *(float(i) for i in q), count=int(v.size))


def rejection_rate(p_values: npt.ArrayLike, alpha: float = 0.05) -> float:
    """
    >>> rejection_rate([0.01, 0.01], 0.05)
    1.0
    """
    p = np.asarray(p_values, dtype=np.float64)
    if p.size == 0:
        raise ValueError("rejection rate of no p-values is undefined")
    if np.any((p < 0.0) | (p > 1.0)):
        raise ValueError("p-values must lie in [0, 1]")
    return float(np.mean(p <= alpha))


def top_k_detection(
    scores: Sequence[float],
    relevant: Sequence[bool],
    k: int = 6,
) -> tuple[float, float]:
    """(sensitivity, 1 - specificity) of calling the k highest-scoring features detected.

    >>> top_k_detection([4, 3, 2, 1], [True, True, False, False], k=2)
    (1.0, 0.0)
    """
    s = np.asarray(scores, dtype=np.float64)
    flags = np.asarray(relevant, dtype=bool)
    if not 0 < k < s.shape[0]:
        raise ValueError(f"k must lie in [1, {s.shape[0] - 1}], got {k}")
    n_relevant = int(flags.sum())
    n_irrelevant = int((~flags).sum())
    if n_relevant == 0 or n_irrelevant == 0:
        raise ValueError("both relevant and irrelevant features are required")

    order = np.lexsort((np.arange(s.shape[0]), -s))
    top = np.zeros(s.shape[0], dtype=bool)
    top[order[:k]] = True
    return float((top & flags).sum()) / n_relevant, float((top & ~flags).sum()) / n_irrelevant


def auc_rank(scores: Sequence[float], relevant: Sequence[bool]) -> float:
    """Probability that a random relevant feature outscores a random irrelevant one,
    ties counting one half.

    >>> auc_rank([3, 1, 2, 0], [True, True, False, False])
    0.75
    """
    s = np.asarray(scores, dtype=np.float64)
    flags = np.asarray(relevant, dtype=bool)
    n_pos = int(flags.sum())
    n_neg = int((~flags).sum())
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs both relevant and irrelevant features")
    ranks = stats.rankdata(s, method="average")
    u = float(ranks[flags].sum()) - n_pos * (n_pos + 1) / 2.0
    return u / (n_pos * n_neg)


def validate_model(model_value: float, oracle_value: float) -> float:
    """Signed discrepancy between achieved and optimal performance."""
    return model_value - oracle_value


def _record(
    scenario: str,
    n: int,
    method: str,
    feature: str,
    metric: str,
    value: float,
) -> dict[str, Any]:
    return {
        "scenario": scenario,
        "n": n,
        "method": method,
        "feature": feature,
        "metric": metric,
        "value": value,
    }


def aggregate(
    outcomes: Iterable[ReplicateOutcome],
    alpha: float = 0.05,
    k: int | None = None,
) -> list[dict[str, Any]]:
    """Summarizes replicates per (scenario, n, method) into long-format records.

    Per feature: mean and sd of the score, rejection rate (when p-values exist) and
    top-k detection rate. Per cell: AUC mean and sd, mean sensitivity and
    1 - specificity, and the model-validation discrepancy summary. `k` defaults to the
    number of relevant features.
    """
    cells = defaultdict[tuple[str, int, str], list[ReplicateOutcome]](list)
    for o in outcomes:
        cells[o.scenario, o.n, o.method].append(o)
    if not cells:
        raise ValueError("nothing to aggregate")

    records = list[dict[str, Any]]()
    for (scenario, n, method), group in sorted(cells.items()):
        features = group[0].features
        if not features:
            raise ValueError("replicate outcomes have no features")
        if any(o.features != features for o in group):
            raise ValueError(f"inconsistent feature sets in {scenario}/{n}/{method}")
        relevant = group[0].relevant
        scores = np.array([o.scores for o in group])

        two_classes = any(relevant) and not all(relevant)
        top_k = k if k is not None else sum(relevant)
        detected = np.zeros(len(features))
        aucs = list[float]()
        sensitivity = list[float]()
        fallout = list[float]()
        if two_classes:
            for o in group:
                aucs.append(auc_rank(o.scores, o.relevant))
                sens, fpr = top_k_detection(o.scores, o.relevant, top_k)
                sensitivity.append(sens)
                fallout.append(fpr)
                order = np.lexsort((np.arange(len(features)), -np.asarray(o.scores)))
                detected[order[:top_k]] += 1

        def add(feature: str, metric: str, value: float) -> None:
            records.append(_record(scenario, n, method, feature, metric, value))

        for j, feature in enumerate(features):
            column = summarize_values(scores[:, j])
            add(feature, "score_mean", column.mean)
            add(feature, "score_sd", column.sd)
            p_values = [o.p_values[j] for o in group if o.p_values is not None]
            if p_values:
                add(feature, "rejection_rate", rejection_rate(p_values, alpha))
            if two_classes:
                add(feature, "top_k_rate", float(detected[j]) / len(group))

        if two_classes:
            auc = summarize_values(aucs)
            add("*", "auc_mean", auc.mean)
            add("*", "auc_sd", auc.sd)
            add("*", "sensitivity", float(np.mean(sensitivity)))
            add("*", "one_minus_specificity", float(np.mean(fallout)))

        discrepancies = [
            validate_model(o.model_value, o.oracle_value)
            for o in group
            if o.model_value is not None and o.oracle_value is not None
        ]
        if discrepancies:
            for metric, value in summarize_values(discrepancies).to_json().items():
                add("*", f"validation_{metric}", float(value))
        add("*", "replicates", float(len(group)))

    return records


def records_by_metric(
    records: Iterable[Mapping[str, Any]],
) -> dict[tuple[str, int, str, str, str], float]:
    """Indexes long-format records by (scenario, n, method, feature, metric)."""
    return {
        (r["scenario"], int(r["n"]), r["method"], r["feature"], r["metric"]): float(r["value"])
        for r in records
    }
