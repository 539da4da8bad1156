# SPDX-FileCopyrightText: 2026 CPIseq developers
# SPDX-License-Identifier: MIT

from dataclasses import dataclass, replace
from typing import Any

from ..baselines import FiScore, loco_analyze, pfi_analyze, scores_to_records
from ..cpi import DeltaOrientation, cpi_analyze, results_to_records
from ..knockoffs import KnockoffSampler, get_sampler
from ..learners import CategoricalSplits, FittedModel, LearnerKind, LearnerSpec, LossKind
from ..penalized import ElasticNetConfig
from ..rng import RandomLike
from ..tabular import Dataset
from .config import RunConfig

SAMPLER_OF_METHOD = {"cpi-seq": "sequential", "cpi-gauss": "gaussian"}


@dataclass(frozen=True)
class MethodOutcome:
    method: str
    records: list[dict[str, Any]]
    scores: dict[str, float]
    p_values: dict[str, float] | None


def enet_config(config: RunConfig) -> ElasticNetConfig:
    return ElasticNetConfig(
        alpha=config["enet_alpha"],
        n_lambdas=config["enet_lambdas"],
        min_level_count=config["min_level_count"],
    )


def sampler_for(method: str, enet: ElasticNetConfig) -> KnockoffSampler:
    try:
        return get_sampler(SAMPLER_OF_METHOD[method], enet)
    except KeyError:
        raise ValueError(f"{method!r} is not a knockoff-based method") from None


def learner_for(method: str, spec: LearnerSpec) -> LearnerSpec:
    """Learner to fit for `method`. Gaussian knockoffs of categorical columns are
    continuous values in the one-hot indicators, so forests scored against them split on
    the raw indicators rather than on decoded levels.

    >>> str(learner_for("cpi-gauss", LearnerSpec(LearnerKind.RANDOM_FOREST, n_trees=50)))
    'rf(trees=50,splits=indicator)'
    >>> str(learner_for("cpi-seq", LearnerSpec(LearnerKind.RANDOM_FOREST, n_trees=50)))
    'rf(trees=50)'
    """
    if method == "cpi-gauss" and spec.kind is LearnerKind.RANDOM_FOREST:
        return replace(spec, categorical_splits=CategoricalSplits.INDICATOR)
    return spec


def method_parameters(
    method: str,
    spec: LearnerSpec,
    enet: ElasticNetConfig,
    loss: LossKind | None,
    orientation: DeltaOrientation = DeltaOrientation.KNOCKOFF_MINUS_ORIGINAL,
) -> dict[str, Any]:
    params: dict[str, Any] = {
        "method": method,
        "learner": str(learner_for(method, spec)),
        "loss": loss.value if loss else "task default",
    }
    if method in SAMPLER_OF_METHOD:
        params["knockoffs"] = sampler_for(method, enet).describe()
        params["delta_orientation"] = orientation.value
    return params


def run_method(
    method: str,
    model: FittedModel,
    train: Dataset,
    test: Dataset,
    loss: LossKind | None,
    alpha: float,
    enet: ElasticNetConfig,
    rng: RandomLike = None,
    n_permutations: int = 5,
    orientation: DeltaOrientation = DeltaOrientation.KNOCKOFF_MINUS_ORIGINAL,
    redraw_per_group: bool = False,
    n_jobs: int = 1,
) -> MethodOutcome:
    """Scores every feature of `test` with one importance method; `model` must have been
    fitted on `train` with `learner_for(method, ...)`."""
    if learner_for(method, model.spec) != model.spec:
        raise ValueError(f"{method} needs a model fitted as {learner_for(method, model.spec)}")

    match method:
        case "cpi-seq" | "cpi-gauss":
            results = cpi_analyze(
                model,
                test,
                sampler_for(method, enet),
                loss=loss,
                alpha=alpha,
                rng=rng,
                orientation=orientation,
                redraw_per_group=redraw_per_group,
                n_jobs=n_jobs,
            )
            return MethodOutcome(
                method,
                results_to_records(results, method),
                {r.group: r.cpi for r in results},
                {r.group: r.p_one_sided for r in results},
            )

        case "pfi":
            scores = pfi_analyze(
                model, test, loss, n_permutations=n_permutations, rng=rng, n_jobs=n_jobs
            )
            return _fi_outcome(method, scores, with_p=False)

        case "loco":
            scores = loco_analyze(
                model.spec,
                train,
                test,
                loss,
                alpha=alpha,
                rng=rng,
                full_model=model,
                n_jobs=n_jobs,
            )
            return _fi_outcome(method, scores, with_p=True)

        case _:
            raise ValueError(f"unknown importance method: {method!r}")


def _fi_outcome(method: str, scores: list[FiScore], with_p: bool) -> MethodOutcome:
    p_values = {s.group: s.p for s in scores if s.p is not None} if with_p else None
    return MethodOutcome(
        method,
        scores_to_records(scores),
        {s.group: s.score for s in scores},
        p_values,
    )
