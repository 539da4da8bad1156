# SPDX-FileCopyrightText: 2026 CPIseq developers
# SPDX-License-Identifier: MIT

import csv
import hashlib
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np
import numpy.typing as npt

from . import json
from .errors import DataError, MultipleDataErrors

FloatArray = npt.NDArray[np.float64]
IntArray = npt.NDArray[np.int64]

MISSING_MARKERS = {"", "NA", "NaN", "nan", "null"}


class ColumnKind(Enum):
    CONTINUOUS = "continuous"
    CATEGORICAL = "categorical"


@dataclass(frozen=True)
class ColumnSchema:
    name: str
    kind: ColumnKind = ColumnKind.CONTINUOUS
    levels: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("column name must not be empty")
        if self.kind is ColumnKind.CATEGORICAL:
            if not self.levels:
                raise ValueError(f"categorical column {self.name!r} has no levels")
            if len(set(self.levels)) != len(self.levels):
                raise ValueError(f"categorical column {self.name!r} has duplicate levels")
        elif self.levels:
            raise ValueError(f"continuous column {self.name!r} can't declare levels")

    @classmethod
    def continuous(cls, name: str) -> "ColumnSchema":
        return cls(name, ColumnKind.CONTINUOUS)

    @classmethod
    def categorical(cls, name: str, levels: Iterable[str]) -> "ColumnSchema":
        return cls(name, ColumnKind.CATEGORICAL, tuple(levels))

    @property
    def is_categorical(self) -> bool:
        return self.kind is ColumnKind.CATEGORICAL

    @property
    def width(self) -> int:
        """Number of encoded columns this column expands to."""
        return len(self.levels) if self.is_categorical else 1

    def level_index(self, label: str) -> int:
        try:
            return self.levels.index(label)
        except ValueError:
            raise DataError(f"unknown level {label!r} of column {self.name!r}") from None

    def to_json(self) -> dict[str, Any]:
        if self.is_categorical:
            return {"name": self.name, "kind": self.kind.value, "levels": list(self.levels)}
        return {"name": self.name, "kind": self.kind.value}

    @classmethod
    def from_json(cls, obj: json.Object) -> "ColumnSchema":
        unknown_keys = set(obj.keys()) - {"name", "kind", "levels"}
        if unknown_keys:
            raise DataError(f"unknown schema keys: {', '.join(sorted(unknown_keys))}")
        try:
            kind = ColumnKind(obj.get("kind", "continuous"))
        except ValueError:
            raise DataError(f"invalid column kind {obj.get('kind')!r}") from None
        try:
            return cls(str(obj["name"]), kind, tuple(str(i) for i in obj.get("levels", ())))
        except (KeyError, ValueError) as e:
            raise DataError(f"invalid schema entry {dict(obj)!r}: {e}") from None


Schema = tuple[ColumnSchema, ...]


def validate_schema(schema: Sequence[ColumnSchema]) -> Schema:
    seen = set[str]()
    for col in schema:
        if col.name in seen:
            raise ValueError(f"duplicate column name {col.name!r} in schema")
        seen.add(col.name)
    return tuple(schema)


def schema_fingerprint(schema: Sequence[ColumnSchema]) -> str:
    """Stable hash of column names, kinds and level vocabularies."""
    payload = json.dumps([c.to_json() for c in schema])
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


def _frozen(a: npt.ArrayLike) -> FloatArray:
    arr = np.array(a, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Dataset:
    """Mixed-type table. Categorical cells hold level indices into their schema's
    vocabulary; a binary target is stored as 0/1 with its 2-level schema."""

    schema: Schema
    cells: FloatArray
    target_schema: ColumnSchema | None = None
    target: FloatArray | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "schema", validate_schema(self.schema))
        cells = _frozen(self.cells)
        if cells.ndim == 1 and len(self.schema) == 0:
            cells = _frozen(cells.reshape(-1, 0))
        if cells.ndim != 2 or cells.shape[1] != len(self.schema):
            raise ValueError(
                f"cells of shape {cells.shape} don't match {len(self.schema)} schema columns"
            )
        if not np.all(np.isfinite(cells)):
            raise DataError("dataset contains missing or non-finite cells")
        for j, col in enumerate(self.schema):
            if col.is_categorical:
                c = cells[:, j]
                if np.any((c != np.round(c)) | (c < 0) | (c >= len(col.levels))):
                    raise DataError(f"column {col.name!r} has level indices out of range")
        object.__setattr__(self, "cells", cells)

        if (self.target is None) != (self.target_schema is None):
            raise ValueError("target values and target schema must be given together")
        if self.target is not None and self.target_schema is not None:
            target = _frozen(self.target)
            if target.shape != (cells.shape[0],):
                raise ValueError("target length doesn't match the row count")
            if not np.all(np.isfinite(target)):
                raise DataError(f"target {self.target_schema.name!r} has missing values")
            if self.target_schema.is_categorical:
                if len(self.target_schema.levels) != 2:
                    raise DataError(
                        f"categorical target {self.target_schema.name!r} must be binary"
                    )
                if np.any((target != 0) & (target != 1)):
                    raise DataError(f"binary target {self.target_schema.name!r} must be 0/1")
            if self.target_schema.name in self.names:
                raise ValueError(f"target {self.target_schema.name!r} is also a feature")
            object.__setattr__(self, "target", target)

    @property
    def n_rows(self) -> int:
        return int(self.cells.shape[0])

    @property
    def n_features(self) -> int:
        return len(self.schema)

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.schema]

    @property
    def is_classification(self) -> bool:
        return self.target_schema is not None and self.target_schema.is_categorical

    def index_of(self, name: str) -> int:
        for i, col in enumerate(self.schema):
            if col.name == name:
                return i
        raise DataError(f"no column {name!r} in dataset")

    def column_schema(self, name: str) -> ColumnSchema:
        return self.schema[self.index_of(name)]

    def column(self, name: str) -> FloatArray:
        return self.cells[:, self.index_of(name)]

    def labels(self, name: str) -> list[str]:
        col = self.column_schema(name)
        if not col.is_categorical:
            raise ValueError(f"column {name!r} is not categorical")
        return [col.levels[int(i)] for i in self.column(name)]

    def require_target(self) -> tuple[ColumnSchema, FloatArray]:
        if self.target is None or self.target_schema is None:
            raise DataError("dataset has no target column")
        return self.target_schema, self.target

    def features(self) -> "Dataset":
        return Dataset(self.schema, self.cells)

    def select(self, names: Iterable[str]) -> "Dataset":
        idx = [self.index_of(n) for n in names]
        return Dataset(
            tuple(self.schema[i] for i in idx),
            self.cells[:, idx],
            self.target_schema,
            self.target,
        )

    def drop(self, names: Iterable[str]) -> "Dataset":
        to_drop = set(names)
        for name in to_drop:
            self.index_of(name)
        return self.select(n for n in self.names if n not in to_drop)

    def take(self, rows: npt.ArrayLike) -> "Dataset":
        idx = np.asarray(rows, dtype=np.int64)
        return Dataset(
            self.schema,
            self.cells[idx],
            self.target_schema,
            None if self.target is None else self.target[idx],
        )

    def with_target(self, schema: ColumnSchema, values: npt.ArrayLike) -> "Dataset":
        return Dataset(self.schema, self.cells, schema, np.asarray(values, dtype=np.float64))

    def with_columns(self, replacements: Mapping[str, npt.ArrayLike]) -> "Dataset":
        cells = np.array(self.cells)
        for name, values in replacements.items():
            cells[:, self.index_of(name)] = values
        return Dataset(self.schema, cells, self.target_schema, self.target)

    def with_cells(self, name: str, values: npt.ArrayLike) -> "Dataset":
        return self.with_columns({name: values})


@dataclass(frozen=True)
class EncodedMatrix:
    """Full one-hot design: every categorical column expands to one indicator per level,
    every continuous column to a single column."""

    values: FloatArray
    groups: Mapping[str, slice]
    schema: Schema = field(default=())

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", _frozen(self.values))

    @property
    def n_rows(self) -> int:
        return int(self.values.shape[0])

    @property
    def width(self) -> int:
        return int(self.values.shape[1])

    def columns_of(self, names: Iterable[str]) -> list[int]:
        idx = list[int]()
        for name in names:
            try:
                s = self.groups[name]
            except KeyError:
                raise DataError(f"no column {name!r} in encoded matrix") from None
            idx.extend(range(s.start, s.stop))
        return idx

    def continuous_columns(self) -> list[int]:
        return self.columns_of(c.name for c in self.schema if not c.is_categorical)

    def with_values(self, values: npt.ArrayLike) -> "EncodedMatrix":
        return EncodedMatrix(np.asarray(values, dtype=np.float64), self.groups, self.schema)

    def substitute(self, other: "EncodedMatrix", names: Iterable[str]) -> "EncodedMatrix":
        """Returns a copy with the encoded columns of `names` taken from `other`."""
        if other.values.shape != self.values.shape:
            raise DataError(
                f"substitute shape {other.values.shape} doesn't match {self.values.shape}"
            )
        idx = self.columns_of(names)
        values = np.array(self.values)
        values[:, idx] = other.values[:, idx]
        return self.with_values(values)


def one_hot_encode(ds: Dataset) -> EncodedMatrix:
    blocks = list[FloatArray]()
    groups = dict[str, slice]()
    offset = 0
    for j, col in enumerate(ds.schema):
        if col.is_categorical:
            block = np.zeros((ds.n_rows, len(col.levels)))
            block[np.arange(ds.n_rows), ds.cells[:, j].astype(np.int64)] = 1.0
        else:
            block = ds.cells[:, j : j + 1]
        blocks.append(block)
        groups[col.name] = slice(offset, offset + col.width)
        offset += col.width

    values = np.hstack(blocks) if blocks else np.zeros((ds.n_rows, 0))
    return EncodedMatrix(values, groups, ds.schema)


def decode_levels(m: EncodedMatrix, name: str) -> IntArray:
    """Recovers level indices from an indicator slice by argmax."""
    return np.argmax(m.values[:, m.groups[name]], axis=1).astype(np.int64)


def split(
    ds: Dataset,
    train_fraction: float,
    rng: np.random.Generator,
) -> tuple[Dataset, Dataset]:
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    n = ds.n_rows
    n_train = int(np.floor(train_fraction * n + 0.5))
    if n < 2 or n_train < 1 or n_train > n - 1:
        raise ValueError(f"can't split {n} rows into non-empty train and test parts")
    order = rng.permutation(n)
    return ds.take(np.sort(order[:n_train])), ds.take(np.sort(order[n_train:]))


def standardize(
    m: EncodedMatrix,
    continuous_only: bool = True,
) -> tuple[EncodedMatrix, FloatArray, FloatArray]:
    """Centers and scales the selected columns to sample mean 0 and sample sd 1.
    Unselected columns get center 0 and scale 1; zero-variance columns are centered
    and keep scale 1."""
    q = m.width
    centers = np.zeros(q)
    scales = np.ones(q)
    idx = m.continuous_columns() if continuous_only else list(range(q))
    if idx and m.n_rows > 0:
        block = m.values[:, idx]
        centers[idx] = block.mean(axis=0)
        if m.n_rows > 1:
            sd = block.std(axis=0, ddof=1)
            scales[idx] = np.where(sd > 1e-12, sd, 1.0)
    return m.with_values((m.values - centers) / scales), centers, scales


def unstandardize(m: EncodedMatrix, centers: FloatArray, scales: FloatArray) -> EncodedMatrix:
    return m.with_values(m.values * scales + centers)


def read_schema(path: str | Path) -> Schema:
    with open(path, "rb") as f:
        return validate_schema([ColumnSchema.from_json(i) for i in json.iter_items(f)])


def write_schema(schema: Sequence[ColumnSchema], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(json.dumps([c.to_json() for c in schema], readable=True))
        f.write("\n")


def infer_schema(
    path: str | Path,
    categorical: Iterable[str] = (),
    exclude: Iterable[str] = (),
) -> Schema:
    """Builds a schema from a CSV header. Listed categorical columns get their
    sorted distinct labels as the level vocabulary; all others are continuous."""
    categorical = set(categorical)
    excluded = set(exclude)
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        header = [h for h in (reader.fieldnames or []) if h not in excluded]
        levels = {name: set[str]() for name in categorical}
        for row in reader:
            for name, seen in levels.items():
                if (label := (row.get(name) or "").strip()) not in MISSING_MARKERS:
                    seen.add(label)

    missing = categorical - set(header)
    if missing:
        raise DataError(f"categorical columns missing from header: {', '.join(sorted(missing))}")
    return validate_schema(
        [
            ColumnSchema.categorical(h, sorted(levels[h]))
            if h in categorical
            else ColumnSchema.continuous(h)
            for h in header
        ]
    )


def read_csv(path: str | Path, schema: Sequence[ColumnSchema], target: str | None) -> Dataset:
    """Parses a CSV file with a header row. `schema` must describe the feature columns and
    (if given) the target column; extra CSV columns are ignored."""
    by_name = {c.name: c for c in validate_schema(schema)}
    if target is not None and target not in by_name:
        raise DataError(f"target column {target!r} is not described by the schema")
    features = [c for c in by_name.values() if c.name != target]

    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        header = set(reader.fieldnames or [])
        missing = [name for name in by_name if name not in header]
        if missing:
            raise DataError(f"{path}: missing columns: {', '.join(missing)}")

        errors = list[DataError]()
        rows = list[list[float]]()
        target_values = list[float]()
        for row_number, row in enumerate(reader, start=1):
            parsed = list[float]()
            for col in features:
                parsed.append(_parse_cell(row.get(col.name), col, row_number, errors))
            rows.append(parsed)
            if target is not None:
                target_col = by_name[target]
                target_values.append(_parse_cell(row.get(target), target_col, row_number, errors))

    if len(errors) == 1:
        raise errors[0]
    elif errors:
        raise MultipleDataErrors(f"reading {path}", errors)

    cells = np.array(rows, dtype=np.float64).reshape(len(rows), len(features))
    if target is None:
        return Dataset(tuple(features), cells)
    return Dataset(tuple(features), cells, by_name[target], np.array(target_values))


def _parse_cell(
    raw: str | None,
    col: ColumnSchema,
    row_number: int,
    errors: list[DataError],
) -> float:
    value = (raw or "").strip()
    if value in MISSING_MARKERS:
        errors.append(DataError(f"row {row_number}, column {col.name!r}: missing cell"))
        return 0.0

    if col.is_categorical:
        try:
            return float(col.levels.index(value))
        except ValueError:
            errors.append(
                DataError(f"row {row_number}, column {col.name!r}: unknown level {value!r}")
            )
            return 0.0

    try:
        parsed = float(value)
    except ValueError:
        parsed = float("nan")
    if not np.isfinite(parsed):
        errors.append(
            DataError(f"row {row_number}, column {col.name!r}: can't parse {value!r} as a number")
        )
        return 0.0
    return parsed


def write_csv(ds: Dataset, path: str | Path) -> None:
    columns = list(ds.schema)
    if ds.target_schema is not None:
        columns.append(ds.target_schema)

    with open(path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f)
        w.writerow([c.name for c in columns])
        for i in range(ds.n_rows):
            row = list(ds.cells[i])
            if ds.target is not None:
                row.append(ds.target[i])
            w.writerow(_format_cell(v, c) for v, c in zip(row, columns))


def _format_cell(value: float, col: ColumnSchema) -> str:
    if col.is_categorical:
        return col.levels[int(value)]
    return repr(float(value))

