# SPDX-FileCopyrightText: 2026 CPIseq developers
# SPDX-License-Identifier: MIT

import numpy as np

RandomLike = np.random.Generator | int | None


def as_generator(rng: RandomLike) -> tuple[np.random.Generator, int | None]:
    """Normalizes a seed or generator into a `Generator`, returning the seed
    if one was given explicitly.

    >>> g, seed = as_generator(7)
    >>> seed
    7
    >>> as_generator(g)[1] is None
    True
    """
    if isinstance(rng, np.random.Generator):
        return rng, None
    return np.random.default_rng(rng), rng


def derive_seeds(rng: np.random.Generator, count: int) -> list[int]:
    """Draws `count` independent child seeds from `rng`, in order."""
    return [int(i) for i in rng.integers(0, 2**63 - 1, size=count, dtype=np.int64)]
