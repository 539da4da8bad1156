# SPDX-FileCopyrightText: 2026 CPIseq developers
# SPDX-License-Identifier: MIT

"""Knockoff samplers: second-order Gaussian knockoffs on the one-hot encoding and
sequential knockoffs on mixed data, plus second-order validity diagnostics.

Samplers only ever see feature columns; a target attached to the input is stripped
before anything is computed.
"""

import logging
from abc import ABC, abstractmethod
from collections.abc import Sequence
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np

from .errors import DataError
from .penalized import (
    CategoricalConditional,
    ElasticNetConfig,
    GaussianConditional,
    fit_elastic_net_cv,
    fit_multinomial_enet_cv,
    predict_conditional,
)
from .rng import RandomLike, as_generator
from .tabular import Dataset, EncodedMatrix, FloatArray, Schema, one_hot_encode

logger = logging.getLogger(__name__)

SHRINKAGE_GRID = (0.0, 0.01, 0.05, 0.1, 0.25, 0.5)
MIN_EIGENVALUE = 1e-8
VARIANCE_FLOOR = 1e-6


class Provenance(Enum):
    GAUSSIAN = "gaussian"
    SEQUENTIAL = "sequential"


@dataclass(frozen=True)
class GaussianKnockoffParams:
    mu_hat: FloatArray
    sigma_hat: FloatArray
    s_diag: FloatArray
    shrinkage: float = 0.0


@dataclass(frozen=True)
class KnockoffMatrix:
    """Knockoff copy of a feature table.

    `encoded` always holds the one-hot representation. `cells` (level indices, like
    `Dataset.cells`) is only available from samplers that respect the schema."""

    schema: Schema
    encoded: EncodedMatrix
    provenance: Provenance
    seed: int | None = None
    cells: FloatArray | None = None

    @property
    def n_rows(self) -> int:
        return self.encoded.n_rows

    def as_dataset(self) -> Dataset:
        if self.cells is None:
            raise ValueError(f"{self.provenance.value} knockoffs have no mixed-type cells")
        return Dataset(self.schema, self.cells)


@dataclass(frozen=True)
class SequentialKnockoffConfig:
    order: tuple[str, ...] | None = None
    """Column order for the sequential sampler; defaults to schema order."""
    enet: ElasticNetConfig = field(default_factory=ElasticNetConfig)


# Gaussian


def estimate_gaussian_params(X: EncodedMatrix) -> GaussianKnockoffParams:
    n, q = X.values.shape
    if n <= 2:
        raise ValueError(f"Gaussian knockoff parameters need more than 2 rows, got {n}")
    mu = X.values.mean(axis=0)
    if q == 0:
        return GaussianKnockoffParams(mu, np.zeros((0, 0)), np.zeros(0))

    cov = np.atleast_2d(np.cov(X.values, rowvar=False, ddof=1))
    diag = np.maximum(np.diag(cov), VARIANCE_FLOOR)
    np.fill_diagonal(cov, diag)

    sigma = cov
    gamma = SHRINKAGE_GRID[-1]
    for gamma in SHRINKAGE_GRID:
        sigma = (1.0 - gamma) * cov + gamma * np.diag(diag)
        if np.linalg.eigvalsh(sigma)[0] >= MIN_EIGENVALUE:
            break
    if gamma > 0.0:
        logger.info("Covariance shrunk toward its diagonal with gamma=%g", gamma)

    sd = np.sqrt(diag)
    corr = sigma / np.outer(sd, sd)
    lambda_min = float(np.linalg.eigvalsh((corr + corr.T) / 2.0)[0])
    s = min(2.0 * lambda_min, 1.0) * diag
    return GaussianKnockoffParams(mu, sigma, np.maximum(s, 0.0), gamma)


def sample_gaussian_knockoffs(
    X: EncodedMatrix,
    params: GaussianKnockoffParams,
    rng: RandomLike = None,
) -> KnockoffMatrix:
    """Draws each row from N(M_i, V) with
    M_i = x_i - (x_i - mu) Sigma^-1 diag(s) and V = 2 diag(s) - diag(s) Sigma^-1 diag(s)."""
    gen, seed = as_generator(rng)
    n, q = X.values.shape
    if params.mu_hat.shape != (q,) or params.sigma_hat.shape != (q, q):
        raise ValueError(f"knockoff parameters don't match a design of width {q}")

    if q == 0:
        values = np.zeros((n, 0))
    else:
        S = np.diag(params.s_diag)
        A = np.linalg.solve(params.sigma_hat, S)
        mean = X.values - (X.values - params.mu_hat) @ A
        V = 2.0 * S - S @ A
        eigenvalues, eigenvectors = np.linalg.eigh((V + V.T) / 2.0)
        root = eigenvectors * np.sqrt(np.clip(eigenvalues, 0.0, None))
        values = mean + gen.standard_normal((n, q)) @ root.T

    return KnockoffMatrix(X.schema, X.with_values(values), Provenance.GAUSSIAN, seed)


# Sequential


def _ordered(names: Sequence[str], order: Sequence[str] | None) -> list[str]:
    if order is None:
        return list(names)
    if sorted(order) != sorted(names):
        raise ValueError(f"sequential order {list(order)} is not a permutation of {list(names)}")
    return list(order)


def _sample_categorical(
    name: str,
    levels: tuple[str, ...],
    design: FloatArray,
    column: FloatArray,
    config: ElasticNetConfig,
    rng: np.random.Generator,
) -> FloatArray:
    # Levels absent from these rows get probability 0; present ones must be common enough.
    y = column.astype(np.int64)
    present = np.flatnonzero(np.bincount(y, minlength=len(levels)))
    remap = np.full(len(levels), -1, dtype=np.int64)
    remap[present] = np.arange(present.shape[0])
    present_labels = tuple(levels[i] for i in present)

    if present.shape[0] == 1:
        return np.full(column.shape[0], float(present[0]))

    try:
        fit = fit_multinomial_enet_cv(design, remap[y], present_labels, config, rng)
    except DataError as e:
        raise DataError(f"column {name!r}: {e}") from e
    cond = predict_conditional(fit, design)
    assert isinstance(cond, CategoricalConditional)
    return present[cond.sample(rng)].astype(np.float64)


def _sample_continuous(
    design: FloatArray,
    column: FloatArray,
    config: ElasticNetConfig,
    rng: np.random.Generator,
) -> FloatArray:
    fit = fit_elastic_net_cv(design, column, config, rng)
    cond = predict_conditional(fit, design)
    assert isinstance(cond, GaussianConditional)
    return cond.sample(rng)


def sample_sequential_knockoffs(
    ds: Dataset,
    config: SequentialKnockoffConfig | None = None,
    rng: RandomLike = None,
) -> KnockoffMatrix:
    """Samples knockoffs column by column: each column is regressed on the one-hot
    encoding of all other original columns plus the knockoffs drawn so far, with a
    cross-validated elastic net (continuous) or multinomial elastic net (categorical)."""
    config = config or SequentialKnockoffConfig()
    gen, seed = as_generator(rng)
    ds = ds.features()
    encoded = one_hot_encode(ds)
    order = _ordered(ds.names, config.order)

    knockoff_cells = np.array(ds.cells)
    knockoff_blocks = dict[str, FloatArray]()
    for name in order:
        col = ds.column_schema(name)
        j = ds.index_of(name)
        others = encoded.columns_of(n for n in ds.names if n != name)
        design = np.hstack([encoded.values[:, others], *knockoff_blocks.values()])

        if col.is_categorical:
            draws = _sample_categorical(name, col.levels, design, ds.cells[:, j], config.enet, gen)
            block = np.zeros((ds.n_rows, len(col.levels)))
            block[np.arange(ds.n_rows), draws.astype(np.int64)] = 1.0
        else:
            draws = _sample_continuous(design, ds.cells[:, j], config.enet, gen)
            block = draws.reshape(-1, 1)

        knockoff_cells[:, j] = draws
        knockoff_blocks[name] = block
        logger.debug("Sampled knockoffs for %r on a design of width %d", name, design.shape[1])

    knockoffs = Dataset(ds.schema, knockoff_cells)
    return KnockoffMatrix(
        ds.schema,
        one_hot_encode(knockoffs),
        Provenance.SEQUENTIAL,
        seed,
        knockoffs.cells,
    )


# Samplers


class KnockoffSampler(ABC):
    name: str

    @abstractmethod
    def sample(self, ds: Dataset, rng: RandomLike = None) -> KnockoffMatrix:
        raise NotImplementedError

    def describe(self) -> dict[str, Any]:
        return {"sampler": self.name}


class GaussianKnockoffSampler(KnockoffSampler):
    """Gaussian knockoffs over the dummy-encoded features, parameters estimated from
    the rows being knocked off."""

    name = "gaussian"

    def sample(self, ds: Dataset, rng: RandomLike = None) -> KnockoffMatrix:
        encoded = one_hot_encode(ds.features())
        return sample_gaussian_knockoffs(encoded, estimate_gaussian_params(encoded), rng)


class SequentialKnockoffSampler(KnockoffSampler):
    name = "sequential"

    def __init__(self, config: SequentialKnockoffConfig | None = None) -> None:
        self.config = config or SequentialKnockoffConfig()

    def sample(self, ds: Dataset, rng: RandomLike = None) -> KnockoffMatrix:
        return sample_sequential_knockoffs(ds, self.config, rng)

    def describe(self) -> dict[str, Any]:
        return {
            "sampler": self.name,
            "order": list(self.config.order) if self.config.order else "schema",
            "enet": self.config.enet.describe(),
        }


def get_sampler(name: str, enet: ElasticNetConfig | None = None) -> KnockoffSampler:
    match name:
        case "gaussian":
            return GaussianKnockoffSampler()
        case "sequential":
            config = SequentialKnockoffConfig(enet=enet or ElasticNetConfig())
            return SequentialKnockoffSampler(config)
        case _:
            raise ValueError(f"unknown knockoff sampler: {name!r}")


# Diagnostics


@dataclass(frozen=True)
class KnockoffDiagnostics:
    max_mean_diff: float
    max_cov_diff: float
    max_cross_cov_diff: float
    level_tv: dict[str, float]
    tolerance: float

    @property
    def flagged(self) -> bool:
        moments = (self.max_mean_diff, self.max_cov_diff, self.max_cross_cov_diff)
        return max(*moments, *self.level_tv.values()) > self.tolerance

    def to_json(self) -> dict[str, Any]:
        return {
            "max_mean_diff": self.max_mean_diff,
            "max_cov_diff": self.max_cov_diff,
            "max_cross_cov_diff": self.max_cross_cov_diff,
            "level_tv": self.level_tv,
            "tolerance": self.tolerance,
            "flagged": self.flagged,
        }


def knockoff_diagnostics(
    X: EncodedMatrix,
    X_tilde: EncodedMatrix | KnockoffMatrix,
    tolerance: float = 0.02,
) -> KnockoffDiagnostics:
    """Second-order exchangeability checks between a design and its knockoffs: means,
    covariances, off-diagonal cross-covariances and per-categorical level frequencies."""
    knock = X_tilde.encoded if isinstance(X_tilde, KnockoffMatrix) else X_tilde
    if knock.values.shape != X.values.shape:
        raise DataError(
            f"knockoff shape {knock.values.shape} doesn't match original {X.values.shape}"
        )
    n, q = X.values.shape
    if q == 0 or n < 2:
        return KnockoffDiagnostics(0.0, 0.0, 0.0, {}, tolerance)

    a = X.values - X.values.mean(axis=0)
    b = knock.values - knock.values.mean(axis=0)
    cov_x = a.T @ a / (n - 1)
    cov_k = b.T @ b / (n - 1)
    cross = a.T @ b / (n - 1)
    off = ~np.eye(q, dtype=bool)

    level_tv = dict[str, float]()
    for col in X.schema:
        if col.is_categorical:
            s = X.groups[col.name]
            freq_x = X.values[:, s].mean(axis=0)
            freq_k = knock.values[:, s].mean(axis=0)
            level_tv[col.name] = 0.5 * float(np.abs(freq_x - freq_k).sum())

    return KnockoffDiagnostics(
        max_mean_diff=float(np.max(np.abs(X.values.mean(axis=0) - knock.values.mean(axis=0)))),
        max_cov_diff=float(np.max(np.abs(cov_x - cov_k))),
        max_cross_cov_diff=float(np.max(np.abs(cross - cov_x)[off])) if q > 1 else 0.0,
        level_tv=level_tv,
        tolerance=tolerance,
    )
