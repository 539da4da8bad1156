# SPDX-FileCopyrightText: 2026 CPIseq developers
# SPDX-License-Identifier: MIT

import logging

import numpy as np
from scipy.special import expit

from ..errors import NumericalError
from ..tabular import EncodedMatrix, FloatArray
from .learner import Estimator, check_binary

logger = logging.getLogger(__name__)

HESSIAN_RIDGE = 1e-6
GRADIENT_TOL = 1e-8
MAX_NEWTON_STEPS = 100


def _design(X: EncodedMatrix) -> FloatArray:
    return np.hstack([np.ones((X.n_rows, 1)), X.values])


class LinearEstimator(Estimator):
    """Ordinary least squares on [1, one-hot design]. Rank-deficient designs get the
    minimum-norm solution."""

    def __init__(self, coefficients: FloatArray) -> None:
        self.coefficients = coefficients

    @classmethod
    def fit(cls, X: EncodedMatrix, y: FloatArray) -> "LinearEstimator":
        coefficients, *_ = np.linalg.lstsq(_design(X), y, rcond=None)
        if not np.all(np.isfinite(coefficients)):
            raise NumericalError("least squares produced non-finite coefficients")
        return cls(coefficients)

    @property
    def intercept(self) -> float:
        return float(self.coefficients[0])

    def predict(self, X: EncodedMatrix) -> FloatArray:
        return _design(X) @ self.coefficients


class LogisticEstimator(Estimator):
    """Logistic regression fitted by Newton-Raphson (IRLS) with a small ridge on the
    Hessian, stopping once the mean log-likelihood gradient norm drops below 1e-8."""

    def __init__(self, coefficients: FloatArray, converged: bool) -> None:
        self.coefficients = coefficients
        self.converged = converged

    @classmethod
    def fit(cls, X: EncodedMatrix, y: FloatArray) -> "LogisticEstimator":
        check_binary(y)
        D = _design(X)
        n, k = D.shape
        beta = np.zeros(k)
        beta[0] = np.log(y.mean() / (1.0 - y.mean()))

        converged = False
        for _ in range(MAX_NEWTON_STEPS):
            p = expit(D @ beta)
            gradient = D.T @ (p - y) / n
            if np.linalg.norm(gradient) < GRADIENT_TOL:
                converged = True
                break
            hessian = (D * (p * (1.0 - p))[:, None]).T @ D / n + HESSIAN_RIDGE * np.eye(k)
            step, *_ = np.linalg.lstsq(hessian, gradient, rcond=None)
            beta = beta - step

        if not np.all(np.isfinite(beta)):
            raise NumericalError("logistic regression diverged")
        if not converged:
            logger.warning(
                "Logistic regression stopped after %d Newton steps (classes may be separable)",
                MAX_NEWTON_STEPS,
            )
        return cls(beta, converged)

    def predict(self, X: EncodedMatrix) -> FloatArray:
        return expit(_design(X) @ self.coefficients)
