# SPDX-FileCopyrightText: 2026 CPIseq developers
# SPDX-License-Identifier: MIT

import numpy as np
import pytest

from cpiseq.tabular import ColumnSchema, Dataset


@pytest.fixture
def mixed_dataset() -> Dataset:
    """200 rows: continuous a, b (b depends on a), categorical c with 3 levels and a
    regression target driven by a and c."""
    gen = np.random.default_rng(0)
    n = 200
    a = gen.normal(size=n)
    b = 0.5 * a + gen.normal(size=n)
    c = gen.integers(0, 3, size=n).astype(np.float64)
    y = 2.0 * a + np.array([-1.0, 0.0, 1.0])[c.astype(int)] + 0.1 * gen.normal(size=n)
    return Dataset(
        (
            ColumnSchema.continuous("a"),
            ColumnSchema.continuous("b"),
            ColumnSchema.categorical("c", ("p", "q", "r")),
        ),
        np.column_stack([a, b, c]),
        ColumnSchema.continuous("y"),
        y,
    )


@pytest.fixture
def linear_dataset() -> Dataset:
    """600 rows of 4 independent Gaussian features; only x1 and x2 drive the target."""
    gen = np.random.default_rng(1)
    n = 600
    X = gen.normal(size=(n, 4))
    y = 2.0 * X[:, 0] + 1.0 * X[:, 1] + 0.5 * gen.normal(size=n)
    return Dataset(
        tuple(ColumnSchema.continuous(f"x{i + 1}") for i in range(4)),
        X,
        ColumnSchema.continuous("y"),
        y,
    )
