# SPDX-FileCopyrightText: 2026 CPIseq developers
# SPDX-License-Identifier: MIT

"""Elastic-net penalized Gaussian and multinomial regression.

Both solvers standardize the design internally (population standard deviation, as glmnet
does) and report coefficients on the original scale. The penalty is

    lambda * (alpha * |beta|_1 + (1 - alpha) / 2 * |beta|_2^2)

applied to slopes only; intercepts are never penalized.
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np
import numpy.typing as npt
from scipy.special import log_softmax, softmax

from .errors import DataError, NumericalError
from .tabular import FloatArray, IntArray

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ElasticNetConfig:
    alpha: float = 0.5
    n_lambdas: int = 20
    lambda_min_ratio: float = 1e-3
    n_folds: int = 5
    sd_floor: float = 1e-6
    min_level_count: int = 5
    fixed_lambda: float | None = None
    """Skips cross-validation and uses this penalty for every fit."""

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"elastic-net alpha must lie in [0, 1], got {self.alpha}")
        if self.n_lambdas < 1 or not 0.0 < self.lambda_min_ratio <= 1.0:
            raise ValueError("invalid lambda grid definition")
        if self.fixed_lambda is not None and self.fixed_lambda < 0:
            raise ValueError("fixed_lambda must be non-negative")

    def describe(self) -> dict[str, Any]:
        if self.fixed_lambda is not None:
            policy = f"fixed({self.fixed_lambda:g})"
        else:
            policy = (
                f"{self.n_folds}-fold CV deviance over {self.n_lambdas}-point log grid "
                f"[{self.lambda_min_ratio:g}*lambda_max, lambda_max]"
            )
        return {
            "alpha": self.alpha,
            "lambda_policy": policy,
            "sd_floor": self.sd_floor,
            "min_level_count": self.min_level_count,
        }


@dataclass(frozen=True)
class ElasticNetFit:
    intercept: float
    coefficients: FloatArray
    alpha: float
    lambda_: float
    residual_sd: float

    @property
    def width(self) -> int:
        return int(self.coefficients.shape[0])


@dataclass(frozen=True)
class MultinomialFit:
    class_labels: tuple[str, ...]
    intercepts: FloatArray
    coef: FloatArray
    """Class × q slope matrix."""
    alpha: float
    lambda_: float
    converged: bool = True

    @property
    def width(self) -> int:
        return int(self.coef.shape[1])


@dataclass(frozen=True)
class GaussianConditional:
    mu: FloatArray
    sigma: float

    def sample(self, rng: np.random.Generator) -> FloatArray:
        return self.mu + self.sigma * rng.standard_normal(self.mu.shape[0])


@dataclass(frozen=True)
class CategoricalConditional:
    probabilities: FloatArray
    class_labels: tuple[str, ...]

    def sample(self, rng: np.random.Generator) -> IntArray:
        """Draws one class index per row by inverting the row-wise CDF."""
        cdf = np.cumsum(self.probabilities, axis=1)
        u = rng.random(self.probabilities.shape[0])
        idx = (cdf < u[:, None]).sum(axis=1)
        return np.minimum(idx, self.probabilities.shape[1] - 1).astype(np.int64)


@dataclass(frozen=True)
class _Scaling:
    center: FloatArray
    scale: FloatArray
    varying: npt.NDArray[np.bool_]

    @classmethod
    def of(cls, X: FloatArray) -> "_Scaling":
        center = X.mean(axis=0) if X.shape[0] else np.zeros(X.shape[1])
        sd = X.std(axis=0) if X.shape[0] else np.zeros(X.shape[1])
        varying = sd > 1e-12
        return cls(center, np.where(varying, sd, 1.0), varying)

    def apply(self, X: FloatArray) -> FloatArray:
        return (X - self.center) / self.scale


def _check_finite(*arrays: npt.ArrayLike) -> None:
    for a in arrays:
        if not np.all(np.isfinite(np.asarray(a, dtype=np.float64))):
            raise NumericalError("penalized regression inputs must be finite")


def _as_design(X: npt.ArrayLike, n: int) -> FloatArray:
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ValueError("design matrix must be 2-dimensional")
    if arr.shape[0] != n:
        raise ValueError(f"design has {arr.shape[0]} rows, response has {n}")
    return arr


def soft_threshold(x: FloatArray | float, t: float) -> Any:
    """
    >>> float(soft_threshold(3.0, 1.0)), float(soft_threshold(-0.5, 1.0))
    (2.0, 0.0)
    """
    return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)


def lambda_max(X: npt.ArrayLike, y: npt.ArrayLike, alpha: float) -> float:
    """Smallest penalty at which every slope is zero (on the standardized design).

    Only the l1 part of the penalty can hold a slope at zero, so this is
    max |z_j'(y - mean(y))| / (n * alpha): the lasso value max |x'y| / n at alpha = 1,
    growing as alpha shrinks. alpha is floored at 1e-3 so ridge-like fits still get a
    finite grid.
    """
    y_arr = np.asarray(y, dtype=np.float64)
    X_arr = _as_design(X, y_arr.shape[0])
    if X_arr.shape[1] == 0 or y_arr.shape[0] == 0:
        return 0.0
    Z = _Scaling.of(X_arr).apply(X_arr)
    n = y_arr.shape[0]
    return float(np.max(np.abs(Z.T @ (y_arr - y_arr.mean()))) / (n * max(alpha, 1e-3)))


def lambda_grid(lam_max: float, n_lambdas: int = 20, min_ratio: float = 1e-3) -> FloatArray:
    """Descending log-spaced grid from `lam_max` to `min_ratio * lam_max`."""
    if lam_max <= 0.0:
        return np.zeros(1)
    return np.geomspace(lam_max, lam_max * min_ratio, n_lambdas)


# Elastic net


def _enet_cd(
    G: FloatArray,
    c: FloatArray,
    varying: npt.NDArray[np.bool_],
    alpha: float,
    lam: float,
    beta: FloatArray,
    tol: float,
    max_sweeps: int,
) -> FloatArray:
    # Covariance-update coordinate descent: G = Z'Z/n with unit diagonal on varying columns.
    beta = beta.copy()
    l1 = lam * alpha
    denom = 1.0 + lam * (1.0 - alpha)
    active = np.flatnonzero(varying)
    grad = c - G @ beta
    for _ in range(max_sweeps):
        max_delta = 0.0
        for j in active:
            old = beta[j]
            new = float(soft_threshold(grad[j] + old, l1)) / denom
            if new != old:
                delta = new - old
                beta[j] = new
                grad -= G[:, j] * delta
                max_delta = max(max_delta, abs(delta))
        if max_delta < tol:
            break
    else:
        logger.warning("Elastic net hit %d sweeps without converging (lambda=%g)", max_sweeps, lam)
    return beta


def _enet_path(
    Z: FloatArray,
    y_centered: FloatArray,
    varying: npt.NDArray[np.bool_],
    alpha: float,
    lambdas: Sequence[float],
    tol: float = 1e-10,
    max_sweeps: int = 10_000,
) -> list[FloatArray]:
    n = Z.shape[0]
    G = Z.T @ Z / n
    c = Z.T @ y_centered / n
    beta = np.zeros(Z.shape[1])
    path = list[FloatArray]()
    for lam in lambdas:
        beta = _enet_cd(G, c, varying, alpha, float(lam), beta, tol, max_sweeps)
        path.append(beta)
    return path


def _enet_finish(
    X: FloatArray,
    y: FloatArray,
    scaling: _Scaling,
    beta_std: FloatArray,
    alpha: float,
    lam: float,
    sd_floor: float,
) -> ElasticNetFit:
    coefficients = np.where(scaling.varying, beta_std / scaling.scale, 0.0)
    intercept = float(y.mean() - scaling.center @ coefficients) if y.shape[0] else 0.0
    residuals = y - intercept - X @ coefficients
    sd = float(residuals.std(ddof=1)) if y.shape[0] > 1 else 0.0
    if not np.isfinite(intercept) or not np.all(np.isfinite(coefficients)):
        raise NumericalError("elastic net produced non-finite coefficients")
    return ElasticNetFit(intercept, coefficients, alpha, lam, max(sd, sd_floor))


def fit_elastic_net(
    X: npt.ArrayLike,
    y: npt.ArrayLike,
    alpha: float = 0.5,
    lambda_: float = 0.0,
    sd_floor: float = 1e-6,
    tol: float = 1e-10,
    max_sweeps: int = 10_000,
) -> ElasticNetFit:
    """Solves min 1/(2n) |y - b0 - X b|^2 + lambda (alpha |b|_1 + (1-alpha)/2 |b|_2^2)
    by cyclic coordinate descent. The solver is deterministic; the only random step of
    fitting, fold assignment, lives in `fit_elastic_net_cv`."""
    y_arr = np.asarray(y, dtype=np.float64)
    X_arr = _as_design(X, y_arr.shape[0])
    _check_finite(X_arr, y_arr, [alpha, lambda_])
    if y_arr.shape[0] < 2:
        raise ValueError("elastic net needs at least 2 rows")
    if lambda_ < 0 or not 0.0 <= alpha <= 1.0:
        raise ValueError("elastic net requires lambda >= 0 and alpha in [0, 1]")

    scaling = _Scaling.of(X_arr)
    Z = scaling.apply(X_arr)
    y_centered = y_arr - y_arr.mean()
    (beta,) = _enet_path(Z, y_centered, scaling.varying, alpha, [lambda_], tol, max_sweeps)
    return _enet_finish(X_arr, y_arr, scaling, beta, alpha, lambda_, sd_floor)


def select_lambda(cv_loss: npt.ArrayLike, lambdas: FloatArray) -> int:
    """Index of the grid penalty with the smallest cross-validated loss. The grid is
    descending, so ties go to the stronger penalty.

    >>> select_lambda([3.0, 1.0, 1.0], np.array([1.0, 0.1, 0.01]))
    1
    """
    loss = np.asarray(cv_loss, dtype=np.float64)
    if loss.shape != lambdas.shape:
        raise ValueError("one cross-validated loss per grid penalty is required")
    if not np.all(np.isfinite(loss)):
        raise NumericalError("cross-validated loss is not finite")
    best = int(np.argmin(loss))
    logger.debug("Cross-validation picked lambda=%g (%d of %d)", lambdas[best], best + 1, len(loss))
    return best


def _folds(n: int, n_folds: int, rng: np.random.Generator) -> IntArray:
    return (rng.permutation(n) % n_folds).astype(np.int64)


def fit_elastic_net_cv(
    X: npt.ArrayLike,
    y: npt.ArrayLike,
    config: ElasticNetConfig,
    rng: np.random.Generator,
) -> ElasticNetFit:
    """Fits the elastic net with lambda chosen by K-fold cross-validated mean squared error
    over a descending log grid (warm-started along the path)."""
    y_arr = np.asarray(y, dtype=np.float64)
    X_arr = _as_design(X, y_arr.shape[0])
    _check_finite(X_arr, y_arr)
    n = y_arr.shape[0]
    if config.fixed_lambda is not None:
        return fit_elastic_net(X_arr, y_arr, config.alpha, config.fixed_lambda, config.sd_floor)

    lambdas = lambda_grid(
        lambda_max(X_arr, y_arr, config.alpha), config.n_lambdas, config.lambda_min_ratio
    )
    n_folds = min(config.n_folds, n // 2)
    if len(lambdas) == 1 or n_folds < 2:
        return fit_elastic_net(X_arr, y_arr, config.alpha, float(lambdas[-1]), config.sd_floor)

    folds = _folds(n, n_folds, rng)
    errors = np.zeros(len(lambdas))
    for k in range(n_folds):
        train, held = folds != k, folds == k
        scaling = _Scaling.of(X_arr[train])
        y_train = y_arr[train]
        path = _enet_path(
            scaling.apply(X_arr[train]),
            y_train - y_train.mean(),
            scaling.varying,
            config.alpha,
            lambdas,
        )
        Z_held = scaling.apply(X_arr[held])
        for i, beta in enumerate(path):
            pred = y_train.mean() + Z_held @ np.where(scaling.varying, beta, 0.0)
            errors[i] += np.sum((y_arr[held] - pred) ** 2)

    best = select_lambda(errors, lambdas)
    scaling = _Scaling.of(X_arr)
    X_std = scaling.apply(X_arr)
    y_centered = y_arr - y_arr.mean()
    path = _enet_path(X_std, y_centered, scaling.varying, config.alpha, lambdas[: best + 1])
    return _enet_finish(
        X_arr, y_arr, scaling, path[-1], config.alpha, float(lambdas[best]), config.sd_floor
    )


# Multinomial


def _one_hot(y: IntArray, k: int) -> FloatArray:
    out = np.zeros((y.shape[0], k))
    out[np.arange(y.shape[0]), y] = 1.0
    return out


def _multinomial_solve(
    Z: FloatArray,
    y: IntArray,
    k: int,
    alpha: float,
    lam: float,
    start: tuple[FloatArray, FloatArray] | None,
    max_iter: int,
    tol: float,
) -> tuple[FloatArray, FloatArray, bool]:
    """FISTA with function-value restart on the symmetric (all-class) parameterization."""
    n, q = Z.shape
    Y = _one_hot(y, k)
    l1 = lam * alpha
    l2 = lam * (1.0 - alpha)

    if start is None:
        freq = np.maximum(Y.mean(axis=0), 1e-12)
        b = np.log(freq) - np.log(freq).mean()
        W = np.zeros((q, k))
    else:
        b, W = start[0].copy(), start[1].copy()

    design = np.hstack([np.ones((n, 1)), Z])
    lipschitz = 0.5 * float(np.linalg.norm(design, 2)) ** 2 / n + l2
    step = 1.0 / max(lipschitz, 1e-12)

    def smooth(b: FloatArray, W: FloatArray) -> tuple[float, FloatArray, FloatArray]:
        log_p = log_softmax(Z @ W + b, axis=1)
        value = -float(np.sum(log_p * Y)) / n + 0.5 * l2 * float(np.sum(W * W))
        residual = (np.exp(log_p) - Y) / n
        return value, residual.sum(axis=0), Z.T @ residual + l2 * W

    def objective(b: FloatArray, W: FloatArray) -> float:
        return smooth(b, W)[0] + l1 * float(np.abs(W).sum())

    obj = objective(b, W)
    b_m, W_m = b, W
    t = 1.0
    for _ in range(max_iter):
        _, grad_b, grad_W = smooth(b_m, W_m)
        b_new = b_m - step * grad_b
        W_new = soft_threshold(W_m - step * grad_W, step * l1)
        obj_new = objective(b_new, W_new)

        if obj_new > obj and t > 1.0:
            # momentum overshot, restart from the last accepted iterate
            b_m, W_m, t = b, W, 1.0
            continue

        converged = abs(obj - obj_new) < tol
        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        momentum = (t - 1.0) / t_new
        b_m = b_new + momentum * (b_new - b)
        W_m = W_new + momentum * (W_new - W)
        b, W, obj, t = b_new, W_new, obj_new, t_new
        if converged:
            return b, W, True
    return b, W, False


def _check_levels(y: IntArray, class_labels: Sequence[str], min_level_count: int) -> None:
    counts = np.bincount(y, minlength=len(class_labels))
    rare = [
        f"{label!r} ({int(count)}x)"
        for label, count in zip(class_labels, counts)
        if count < min_level_count
    ]
    if rare:
        raise DataError(
            f"levels occurring fewer than {min_level_count} times: {', '.join(rare)}"
        )


def _as_labels(y: npt.ArrayLike, k: int) -> IntArray:
    arr = np.asarray(y)
    if arr.ndim != 1 or (arr.size and (arr.min() < 0 or arr.max() >= k)):
        raise ValueError(f"class indices must be a vector with values in [0, {k})")
    if arr.size and np.any(arr != np.round(arr)):
        raise ValueError("class indices must be integers")
    return arr.astype(np.int64)


def _multinomial_fit_from(
    class_labels: tuple[str, ...],
    scaling: _Scaling,
    b: FloatArray,
    W: FloatArray,
    alpha: float,
    lam: float,
    converged: bool,
) -> MultinomialFit:
    coef = np.where(scaling.varying[:, None], W / scaling.scale[:, None], 0.0).T
    intercepts = b - coef @ scaling.center
    if not np.all(np.isfinite(coef)) or not np.all(np.isfinite(intercepts)):
        raise NumericalError("multinomial elastic net produced non-finite coefficients")
    if not converged:
        logger.debug("Multinomial elastic net stopped at the iteration cap (lambda=%g)", lam)
    return MultinomialFit(class_labels, intercepts, coef, alpha, lam, converged)


def fit_multinomial_enet(
    X: npt.ArrayLike,
    y: npt.ArrayLike,
    class_labels: Sequence[str],
    alpha: float = 0.5,
    lambda_: float = 0.0,
    min_level_count: int = 5,
    max_iter: int = 500,
    tol: float = 1e-7,
) -> MultinomialFit:
    """Maximizes the elastic-net penalized multinomial log-likelihood by proximal gradient.
    `y` holds class indices into `class_labels`."""
    labels = tuple(class_labels)
    y_arr = _as_labels(y, len(labels))
    X_arr = _as_design(X, y_arr.shape[0])
    _check_finite(X_arr, [alpha, lambda_])
    if lambda_ < 0 or not 0.0 <= alpha <= 1.0:
        raise ValueError("multinomial elastic net requires lambda >= 0 and alpha in [0, 1]")
    _check_levels(y_arr, labels, min_level_count)

    scaling = _Scaling.of(X_arr)
    b, W, converged = _multinomial_solve(
        scaling.apply(X_arr), y_arr, len(labels), alpha, lambda_, None, max_iter, tol
    )
    return _multinomial_fit_from(labels, scaling, b, W, alpha, lambda_, converged)


def multinomial_lambda_max(X: FloatArray, y: IntArray, k: int, alpha: float) -> float:
    if X.shape[1] == 0 or y.shape[0] == 0:
        return 0.0
    Z = _Scaling.of(X).apply(X)
    Y = _one_hot(y, k)
    return float(np.max(np.abs(Z.T @ (Y - Y.mean(axis=0))))) / (y.shape[0] * max(alpha, 1e-3))


def _stratified_folds(y: IntArray, n_folds: int, rng: np.random.Generator) -> IntArray:
    folds = np.zeros(y.shape[0], dtype=np.int64)
    offset = 0
    for cls in np.unique(y):
        idx = rng.permutation(np.flatnonzero(y == cls))
        folds[idx] = (np.arange(idx.shape[0]) + offset) % n_folds
        offset += idx.shape[0]
    return folds


def fit_multinomial_enet_cv(
    X: npt.ArrayLike,
    y: npt.ArrayLike,
    class_labels: Sequence[str],
    config: ElasticNetConfig,
    rng: np.random.Generator,
    max_iter: int = 500,
    tol: float = 1e-7,
) -> MultinomialFit:
    """Multinomial elastic net with lambda chosen by stratified K-fold cross-validated
    deviance over a descending log grid."""
    labels = tuple(class_labels)
    k = len(labels)
    y_arr = _as_labels(y, k)
    X_arr = _as_design(X, y_arr.shape[0])
    _check_finite(X_arr)
    _check_levels(y_arr, labels, config.min_level_count)

    def fit(lam: float) -> MultinomialFit:
        return fit_multinomial_enet(
            X_arr, y_arr, labels, config.alpha, lam, config.min_level_count, max_iter, tol
        )

    if config.fixed_lambda is not None:
        return fit(config.fixed_lambda)

    lambdas = lambda_grid(
        multinomial_lambda_max(X_arr, y_arr, k, config.alpha),
        config.n_lambdas,
        config.lambda_min_ratio,
    )
    n_folds = min(config.n_folds, y_arr.shape[0] // 2)
    if len(lambdas) == 1 or n_folds < 2:
        return fit(float(lambdas[-1]))

    folds = _stratified_folds(y_arr, n_folds, rng)
    deviance = np.zeros(len(lambdas))
    for fold in range(n_folds):
        train, held = folds != fold, folds == fold
        scaling = _Scaling.of(X_arr[train])
        Z_train = scaling.apply(X_arr[train])
        Z_held = scaling.apply(X_arr[held])
        start: tuple[FloatArray, FloatArray] | None = None
        for i, lam in enumerate(lambdas):
            b, W, _ = _multinomial_solve(
                Z_train, y_arr[train], k, config.alpha, float(lam), start, max_iter, tol
            )
            start = (b, W)
            log_p = log_softmax(Z_held @ W + b, axis=1)
            deviance[i] -= 2.0 * float(np.sum(log_p[np.arange(log_p.shape[0]), y_arr[held]]))

    best = select_lambda(deviance, lambdas)
    scaling = _Scaling.of(X_arr)
    Z = scaling.apply(X_arr)
    start = None
    converged = True
    for lam in lambdas[: best + 1]:
        b, W, converged = _multinomial_solve(
            Z, y_arr, k, config.alpha, float(lam), start, max_iter, tol
        )
        start = (b, W)
    assert start is not None
    b, W = start
    return _multinomial_fit_from(
        labels, scaling, b, W, config.alpha, float(lambdas[best]), converged
    )


def predict_conditional(
    fit: ElasticNetFit | MultinomialFit,
    X_rows: npt.ArrayLike,
) -> GaussianConditional | CategoricalConditional:
    """Per-row sampling distribution: N(mu_i, sigma) for a linear fit,
    Multinom(pi_i) for a multinomial fit."""
    X_arr = np.asarray(X_rows, dtype=np.float64)
    if X_arr.ndim == 1:
        X_arr = X_arr.reshape(1, -1)
    if X_arr.ndim != 2 or X_arr.shape[1] != fit.width:
        raise ValueError(f"rows of width {X_arr.shape[-1]} don't match a fit of width {fit.width}")

    if isinstance(fit, ElasticNetFit):
        return GaussianConditional(fit.intercept + X_arr @ fit.coefficients, fit.residual_sd)
    scores = X_arr @ fit.coef.T + fit.intercepts
    return CategoricalConditional(softmax(scores, axis=1), fit.class_labels)
