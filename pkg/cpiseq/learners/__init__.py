# SPDX-FileCopyrightText: 2026 CPIseq developers
# SPDX-License-Identifier: MIT

from .all import FittedModel, evaluate, fit, predict, predict_encoded
from .learner import (
    CategoricalSplits,
    Estimator,
    LearnerKind,
    LearnerSpec,
    TaskKind,
    parse_learner_spec,
)
from .loss import LOG_LOSS_EPS, LossKind, default_loss, instance_loss

__all__ = [
    "CategoricalSplits",
    "Estimator",
    "FittedModel",
    "LOG_LOSS_EPS",
    "LearnerKind",
    "LearnerSpec",
    "LossKind",
    "TaskKind",
    "default_loss",
    "evaluate",
    "fit",
    "instance_loss",
    "parse_learner_spec",
    "predict",
    "predict_encoded",
]
