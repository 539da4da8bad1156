# SPDX-FileCopyrightText: 2026 CPIseq developers
# SPDX-License-Identifier: MIT

"""Conditional feature importance testing on mixed tabular data with sequential knockoffs."""

__version__ = "1.0.0"
