# SPDX-FileCopyrightText: 2026 CPIseq developers
# SPDX-License-Identifier: MIT

"""Synthetic mixed-data scenarios with known ground truth.

- `dag`: four variables X1 -> X4 -> Y <- X3 <- X2, where X1 and X2 matter only through
  their children, with optional categorical versions of X1 / X3 (or of every variable).
- `grid`: twelve correlated pairs-of-columns of three types (linear, interquartile
  nonlinear, categorical), six of them relevant.
- `confounder`: C -> X, C -> Y; X is marginally but not conditionally predictive.

A categorical variable is created by cutting its continuous draw into quantile bins
with random letter labels. Downstream equations then use the categorical's level-effect
representation (effects evenly spaced over [-beta, beta] in the order of the sorted
vocabulary, i.e. dummy columns times the effect vector) in place of beta * X.
"""

import string
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, NamedTuple

import numpy as np
from scipy import special, stats

from .errors import NumericalError
from .rng import RandomLike, as_generator
from .tabular import ColumnSchema, Dataset, FloatArray, IntArray

INTERQUARTILE_HALF_WIDTH = float(stats.norm.ppf(0.75))
GRID_EFFECTS = (0.0, 1.0, 0.0, 3.0) * 3


class TargetKind(Enum):
    REGRESSION = "regression"
    CLASSIFICATION = "classification"


def _check_levels(name: str, c: int | None, n: int) -> None:
    if c is None:
        return
    if not 2 <= c <= len(string.ascii_uppercase):
        raise ValueError(f"{name}: categorical level count must lie in [2, 26], got {c}")
    if n < 10 * c:
        raise ValueError(f"{name}: {n} rows are too few for {c} quantile bins (need {10 * c})")


@dataclass(frozen=True)
class DagScenarioConfig:
    n: int = 1000
    beta: float = 0.5
    x1_levels: int | None = None
    x3_levels: int | None = None
    all_levels: int | None = None
    """Makes every variable categorical with this many levels."""
    target: TargetKind = TargetKind.REGRESSION

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValueError(f"n must be at least 2, got {self.n}")
        for name in ("X1", "X2", "X3", "X4"):
            _check_levels(name, self.levels_of(name), self.n)

    def levels_of(self, name: str) -> int | None:
        if self.all_levels is not None:
            return self.all_levels
        return {"X1": self.x1_levels, "X3": self.x3_levels}.get(name)


@dataclass(frozen=True)
class GridScenarioConfig:
    n: int = 2000
    rho: float = 0.5
    levels: int = 2
    target: TargetKind = TargetKind.REGRESSION
    snr: float = 2.0
    ber: float = 0.2

    def __post_init__(self) -> None:
        if not -1.0 < self.rho < 1.0:
            raise ValueError(f"rho must lie in (-1, 1), got {self.rho}")
        _check_levels("levels", self.levels, self.n)
        if not 0.0 < self.snr < np.inf:
            raise ValueError(f"snr must be positive and finite, got {self.snr}")
        if not 0.0 < self.ber < 0.5:
            raise ValueError(f"ber must lie in (0, 0.5), got {self.ber}")


@dataclass(frozen=True)
class ConfounderScenarioConfig:
    n: int = 200
    strength: float = 1.0

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValueError(f"n must be at least 2, got {self.n}")


ScenarioConfig = DagScenarioConfig | GridScenarioConfig | ConfounderScenarioConfig


@dataclass(frozen=True)
class GeneratedData:
    dataset: Dataset
    relevant: dict[str, bool]
    conditional_null: dict[str, bool]
    probabilities: FloatArray | None = None
    snr: float | None = None
    extra: dict[str, Any] = field(default_factory=dict[str, Any])

    def oracle(self) -> dict[str, float]:
        if self.probabilities is not None:
            return oracle_performance(probabilities=self.probabilities)
        if self.snr is not None:
            return oracle_performance(snr=self.snr)
        return {}

    def truth_json(self) -> dict[str, Any]:
        return {
            "relevant": self.relevant,
            "conditional_null": self.conditional_null,
            "snr": self.snr,
            "oracle": self.oracle(),
            **self.extra,
        }


def level_effects(beta: float, c: int) -> FloatArray:
    """
    >>> level_effects(1.0, 4).round(4).tolist()
    [-1.0, -0.3333, 0.3333, 1.0]
    """
    if c < 2:
        raise ValueError(f"a categorical needs at least 2 levels, got {c}")
    return np.linspace(-beta, beta, c)


class Categorized(NamedTuple):
    cells: IntArray
    """Level index of every row within `levels`."""
    levels: tuple[str, ...]
    """Alphabetically sorted vocabulary."""
    bins: IntArray
    """Quantile bin (0 = lowest) of every row."""


def quantile_bins(values: FloatArray, c: int) -> IntArray:
    """Splits values into `c` equal-frequency bins using average ranks.

    >>> quantile_bins(np.array([1.0, 2.0, 3.0, 4.0]), 2).tolist()
    [0, 0, 1, 1]
    """
    n = values.shape[0]
    ranks = stats.rankdata(values, method="average")
    bins = np.floor((ranks - 0.5) * c / n).astype(np.int64)
    bins = np.clip(bins, 0, c - 1)
    if np.unique(bins).shape[0] < c:
        raise ValueError(f"too many ties to cut {n} values into {c} quantile bins")
    return bins


def categorize(values: FloatArray, c: int, rng: RandomLike = None) -> Categorized:
    """Cuts values into `c` quantile bins and names the bins with distinct random letters."""
    gen, _ = as_generator(rng)
    if not 2 <= c <= len(string.ascii_uppercase):
        raise ValueError(f"categorical level count must lie in [2, 26], got {c}")
    bins = quantile_bins(np.asarray(values, dtype=np.float64), c)
    letters = [string.ascii_uppercase[i] for i in gen.choice(26, size=c, replace=False)]
    levels = tuple(sorted(letters))
    bin_to_cell = np.array([levels.index(letter) for letter in letters], dtype=np.int64)
    return Categorized(bin_to_cell[bins], levels, bins)


def interquartile_indicator(x: FloatArray) -> FloatArray:
    """+1 inside the standard normal interquartile range, -1 outside.

    >>> interquartile_indicator(np.array([0.0, 2.0])).tolist()
    [1.0, -1.0]
    """
    return np.where(np.abs(x) <= INTERQUARTILE_HALF_WIDTH, 1.0, -1.0)


def grid_covariance(rho: float, n_pairs: int = 6) -> FloatArray:
    """Block-diagonal covariance of unit-variance pairs correlated by `rho`."""
    block = np.array([[1.0, rho], [rho, 1.0]])
    return np.kron(np.eye(n_pairs), block)


def calibrate_snr(signal: FloatArray, target_snr: float = 2.0) -> float:
    """Noise standard deviation giving var(signal) / sigma^2 = target_snr."""
    if not 0.0 < target_snr < np.inf:
        raise ValueError(f"target SNR must be positive and finite, got {target_snr}")
    variance = float(np.var(signal, ddof=1))
    if variance <= 0.0:
        raise NumericalError("can't calibrate noise for a zero-variance signal")
    return float(np.sqrt(variance / target_snr))


def bayes_error_rate(eta: FloatArray, b: float) -> float:
    p = special.expit(b * eta)
    return float(np.mean(np.minimum(p, 1.0 - p)))


def calibrate_ber(eta: FloatArray, target_ber: float = 0.2, tol: float = 1e-3) -> float:
    """Scale b such that rows drawn as Bern(logit^-1(b * eta)) have the target Bayes
    error rate, found by bisection (the rate decreases monotonically in b)."""
    if not 0.0 < target_ber < 0.5:
        raise ValueError(f"target BER must lie in (0, 0.5), got {target_ber}")
    if np.ptp(eta) == 0.0:
        raise NumericalError("can't calibrate the Bayes error rate of a constant predictor")

    lo, hi = 0.0, 1.0
    while bayes_error_rate(eta, hi) > target_ber:
        lo, hi = hi, 2.0 * hi
        if hi > 1e12:
            raise NumericalError(f"Bayes error rate {target_ber} is unreachable")

    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if bayes_error_rate(eta, mid) > target_ber:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12 * hi:
            break

    b = 0.5 * (lo + hi)
    if abs(bayes_error_rate(eta, b) - target_ber) > tol:
        raise NumericalError(f"Bayes error rate {target_ber} is unreachable within {tol}")
    return b


def oracle_performance(
    snr: float | None = None,
    probabilities: FloatArray | None = None,
) -> dict[str, float]:
    """Best achievable R² (from the SNR) or accuracy (from true class-1 probabilities).

    >>> oracle_performance(snr=2.0)["r2_star"] == 2 / 3
    True
    """
    if (snr is None) == (probabilities is None):
        raise ValueError("give exactly one of snr or probabilities")
    if snr is not None:
        if snr < 0.0:
            raise ValueError(f"snr must be non-negative, got {snr}")
        return {"r2_star": snr / (snr + 1.0)}
    assert probabilities is not None
    p = np.asarray(probabilities, dtype=np.float64)
    return {"accuracy_star": float(np.mean(np.maximum(p, 1.0 - p)))}


def _target_schema(kind: TargetKind) -> ColumnSchema:
    if kind is TargetKind.CLASSIFICATION:
        return ColumnSchema.categorical("Y", ("0", "1"))
    return ColumnSchema.continuous("Y")


def _draw_classes(
    eta: FloatArray,
    gen: np.random.Generator,
) -> tuple[FloatArray, FloatArray]:
    p = special.expit(eta)
    return (gen.random(eta.shape[0]) < p).astype(np.float64), p


def dag_snr(data: GeneratedData) -> float:
    """Var(Y) - 1: the explained part of a DAG regression target with unit noise."""
    _, y = data.dataset.require_target()
    return float(np.var(y, ddof=1)) - 1.0


def gen_dag(config: DagScenarioConfig, rng: RandomLike = None) -> GeneratedData:
    gen, _ = as_generator(rng)
    n, beta = config.n, config.beta
    schema = list[ColumnSchema]()
    cells = list[FloatArray]()

    def visible(name: str, latent: FloatArray) -> FloatArray:
        # Records the learner-visible column and returns its downstream effect.
        c = config.levels_of(name)
        if c is None:
            schema.append(ColumnSchema.continuous(name))
            cells.append(latent)
            return beta * latent
        cat = categorize(latent, c, gen)
        schema.append(ColumnSchema.categorical(name, cat.levels))
        cells.append(cat.cells.astype(np.float64))
        return level_effects(beta, c)[cat.cells]

    effect_1 = visible("X1", gen.standard_normal(n))
    effect_2 = visible("X2", gen.standard_normal(n))
    effect_3 = visible("X3", effect_2 + gen.standard_normal(n))
    effect_4 = visible("X4", effect_1 + gen.standard_normal(n))

    probabilities: FloatArray | None = None
    if config.target is TargetKind.CLASSIFICATION:
        y, probabilities = _draw_classes(effect_3 - effect_4, gen)
    else:
        y = effect_3 + effect_4 + gen.standard_normal(n)

    data = GeneratedData(
        Dataset(tuple(schema), np.column_stack(cells), _target_schema(config.target), y),
        relevant={"X1": False, "X2": False, "X3": True, "X4": True},
        conditional_null={"X1": True, "X2": True, "X3": False, "X4": False},
        probabilities=probabilities,
    )
    if config.target is TargetKind.REGRESSION:
        return replace(data, snr=dag_snr(data))
    return data


def gen_grid(config: GridScenarioConfig, rng: RandomLike = None) -> GeneratedData:
    gen, _ = as_generator(rng)
    n = config.n
    covariance = grid_covariance(config.rho)
    Z = gen.multivariate_normal(np.zeros(12), covariance, size=n, method="cholesky")
    effects = level_effects(1.0, config.levels)

    schema = list[ColumnSchema]()
    cells = list[FloatArray]()
    signal = np.zeros(n)
    for j, beta in enumerate(GRID_EFFECTS):
        name = f"X{j + 1}"
        z = Z[:, j]
        if j < 4:
            schema.append(ColumnSchema.continuous(name))
            cells.append(z)
            signal += beta * z
        elif j < 8:
            schema.append(ColumnSchema.continuous(name))
            cells.append(z)
            signal += beta * interquartile_indicator(z)
        else:
            cat = categorize(z, config.levels, gen)
            schema.append(ColumnSchema.categorical(name, cat.levels))
            cells.append(cat.cells.astype(np.float64))
            signal += beta * effects[cat.cells]

    probabilities: FloatArray | None = None
    snr: float | None = None
    extra = dict[str, Any]()
    if config.target is TargetKind.CLASSIFICATION:
        b = calibrate_ber(signal, config.ber)
        y, probabilities = _draw_classes(b * signal, gen)
        extra["beta_ber"] = b
    else:
        sigma = calibrate_snr(signal, config.snr)
        y = signal + sigma * gen.standard_normal(n)
        snr = config.snr
        extra["noise_sd"] = sigma

    relevant = {f"X{j + 1}": beta != 0.0 for j, beta in enumerate(GRID_EFFECTS)}
    return GeneratedData(
        Dataset(tuple(schema), np.column_stack(cells), _target_schema(config.target), y),
        relevant=relevant,
        conditional_null={k: not v for k, v in relevant.items()},
        probabilities=probabilities,
        snr=snr,
        extra=extra,
    )


def gen_confounder(config: ConfounderScenarioConfig, rng: RandomLike = None) -> GeneratedData:
    gen, _ = as_generator(rng)
    n, a = config.n, config.strength
    c = gen.standard_normal(n)
    x = a * c + gen.standard_normal(n)
    y = a * c + gen.standard_normal(n)
    schema = (ColumnSchema.continuous("C"), ColumnSchema.continuous("X"))
    return GeneratedData(
        Dataset(schema, np.column_stack([c, x]), ColumnSchema.continuous("Y"), y),
        relevant={"C": True, "X": False},
        conditional_null={"C": False, "X": True},
        snr=a * a,
    )


def generate(config: ScenarioConfig, rng: RandomLike = None) -> GeneratedData:
    match config:
        case DagScenarioConfig():
            return gen_dag(config, rng)
        case GridScenarioConfig():
            return gen_grid(config, rng)
        case ConfounderScenarioConfig():
            return gen_confounder(config, rng)
