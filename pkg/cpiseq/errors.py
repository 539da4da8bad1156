# SPDX-FileCopyrightText: 2026 CPIseq developers
# SPDX-License-Identifier: MIT

from impuls.errors import DataError, MultipleDataErrors

__all__ = ["DataError", "MultipleDataErrors", "NumericalError"]


class NumericalError(ArithmeticError):
    """Raised when a numeric routine cannot produce a finite, well-defined result."""
