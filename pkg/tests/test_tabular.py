# SPDX-FileCopyrightText: 2026 CPIseq developers
# SPDX-License-Identifier: MIT

from pathlib import Path

import numpy as np
import pytest

from cpiseq.errors import DataError, MultipleDataErrors
from cpiseq.tabular import (
    ColumnSchema,
    Dataset,
    decode_levels,
    infer_schema,
    one_hot_encode,
    read_csv,
    read_schema,
    split,
    standardize,
    unstandardize,
    write_csv,
    write_schema,
)


def test_column_schema_rejects_bad_levels() -> None:
    with pytest.raises(ValueError):
        ColumnSchema.categorical("c", ())
    with pytest.raises(ValueError):
        ColumnSchema.categorical("c", ("a", "a"))


def test_dataset_rejects_duplicate_names() -> None:
    with pytest.raises(ValueError):
        Dataset((ColumnSchema.continuous("a"), ColumnSchema.continuous("a")), np.zeros((2, 2)))


def test_dataset_rejects_out_of_range_levels() -> None:
    with pytest.raises(DataError):
        Dataset((ColumnSchema.categorical("c", ("x", "y")),), np.array([[0.0], [2.0]]))


def test_dataset_rejects_non_binary_categorical_target() -> None:
    with pytest.raises(DataError):
        Dataset(
            (ColumnSchema.continuous("a"),),
            np.zeros((2, 1)),
            ColumnSchema.categorical("y", ("a", "b", "c")),
            np.array([0.0, 1.0]),
        )


def test_one_hot_encode_layout(mixed_dataset: Dataset) -> None:
    m = one_hot_encode(mixed_dataset.features())
    assert m.width == 5
    assert m.groups["c"] == slice(2, 5)
    assert np.all(m.values[:, 2:5].sum(axis=1) == 1.0)
    assert np.array_equal(decode_levels(m, "c"), mixed_dataset.column("c").astype(np.int64))
    assert m.continuous_columns() == [0, 1]


def test_substitute_replaces_only_named_columns(mixed_dataset: Dataset) -> None:
    m = one_hot_encode(mixed_dataset.features())
    other = m.with_values(np.zeros_like(m.values))
    swapped = m.substitute(other, ["c"])
    assert np.all(swapped.values[:, 2:5] == 0.0)
    assert np.array_equal(swapped.values[:, :2], m.values[:, :2])


def test_split_partitions_rows(mixed_dataset: Dataset) -> None:
    train, test = split(mixed_dataset, 2 / 3, np.random.default_rng(3))
    assert train.n_rows == 133
    assert test.n_rows == 67
    assert train.target is not None and test.target is not None
    combined = np.sort(np.concatenate([train.target, test.target]))
    assert np.array_equal(combined, np.sort(mixed_dataset.require_target()[1]))


def test_split_rejects_degenerate_fraction(mixed_dataset: Dataset) -> None:
    with pytest.raises(ValueError):
        split(mixed_dataset, 1.0, np.random.default_rng(0))


def test_standardize_round_trip(mixed_dataset: Dataset) -> None:
    m = one_hot_encode(mixed_dataset.features())
    std, centers, scales = standardize(m)
    assert np.allclose(std.values[:, :2].mean(axis=0), 0.0)
    assert np.allclose(std.values[:, :2].std(axis=0, ddof=1), 1.0)
    assert np.array_equal(std.values[:, 2:], m.values[:, 2:])
    assert np.allclose(unstandardize(std, centers, scales).values, m.values)


def test_csv_and_schema_files(tmp_path: Path, mixed_dataset: Dataset) -> None:
    schema = [*mixed_dataset.schema, ColumnSchema.continuous("y")]
    write_csv(mixed_dataset, tmp_path / "data.csv")
    write_schema(schema, tmp_path / "schema.json")

    assert list(read_schema(tmp_path / "schema.json")) == schema
    loaded = read_csv(tmp_path / "data.csv", schema, "y")
    assert loaded.schema == mixed_dataset.schema
    assert np.array_equal(loaded.cells, mixed_dataset.cells)
    assert loaded.target is not None and mixed_dataset.target is not None
    assert np.array_equal(loaded.target, mixed_dataset.target)


def test_infer_schema_sorts_levels(tmp_path: Path) -> None:
    path = tmp_path / "data.csv"
    path.write_text("a,color,y\n1.5,red,0\n2.0,blue,1\n0.5,red,1\n")
    schema = infer_schema(path, ["color"])
    assert schema[1] == ColumnSchema.categorical("color", ("blue", "red"))
    assert not schema[0].is_categorical


def test_read_csv_collects_every_bad_cell(tmp_path: Path) -> None:
    path = tmp_path / "data.csv"
    path.write_text("a,c\nfoo,x\n1.0,z\n,y\n")
    schema = [ColumnSchema.continuous("a"), ColumnSchema.categorical("c", ("x", "y"))]
    with pytest.raises(MultipleDataErrors):
        read_csv(path, schema, None)


def test_read_csv_missing_column(tmp_path: Path) -> None:
    path = tmp_path / "data.csv"
    path.write_text("a\n1.0\n")
    with pytest.raises(DataError):
        read_csv(path, [ColumnSchema.continuous("a"), ColumnSchema.continuous("b")], None)
