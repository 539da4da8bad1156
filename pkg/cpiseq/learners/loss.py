# SPDX-FileCopyrightText: 2026 CPIseq developers
# SPDX-License-Identifier: MIT

from enum import Enum

import numpy as np
import numpy.typing as npt

from ..tabular import FloatArray
from .learner import TaskKind

LOG_LOSS_EPS = 1e-12


class LossKind(Enum):
    MSE = "mse"
    LOG_LOSS = "log_loss"


def instance_loss(
    loss: LossKind,
    pred: npt.ArrayLike,
    truth: npt.ArrayLike,
    eps: float = LOG_LOSS_EPS,
) -> FloatArray:
    """Per-row loss of predictions against the truth.

    >>> instance_loss(LossKind.MSE, [0.5], [1.0]).tolist()
    [0.25]
    >>> round(float(instance_loss(LossKind.LOG_LOSS, [0.5], [0.0])[0]), 4)
    0.6931
    """
    p = np.asarray(pred, dtype=np.float64)
    y = np.asarray(truth, dtype=np.float64)
    if p.shape != y.shape:
        raise ValueError(f"prediction shape {p.shape} doesn't match truth shape {y.shape}")

    match loss:
        case LossKind.MSE:
            return (p - y) ** 2
        case LossKind.LOG_LOSS:
            p = np.clip(p, eps, 1.0 - eps)
            return -(y * np.log(p) + (1.0 - y) * np.log1p(-p))


def default_loss(task: TaskKind) -> LossKind:
    return LossKind.LOG_LOSS if task is TaskKind.CLASSIFICATION else LossKind.MSE
