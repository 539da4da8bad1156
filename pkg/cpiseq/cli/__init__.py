# SPDX-FileCopyrightText: 2026 CPIseq developers
# SPDX-License-Identifier: MIT

import logging
from collections.abc import Sequence

import numpy as np

from ..errors import DataError, MultipleDataErrors, NumericalError
from .app import CpiSeqApp

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3

logger = logging.getLogger("cpiseq")


def main(argv: Sequence[str] | None = None) -> int:
    """Runs the command line interface, returning the process exit code."""
    try:
        CpiSeqApp().run(argv)
    except SystemExit as e:
        # argparse exits with 0 for --help and 2 for usage errors
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE
    except (DataError, MultipleDataErrors, OSError) as e:
        logger.critical("%s", e)
        return EXIT_DATA
    except (NumericalError, np.linalg.LinAlgError, FloatingPointError) as e:
        logger.critical("Numeric failure: %s", e)
        return EXIT_NUMERIC
    except ValueError as e:
        logger.critical("%s", e)
        return EXIT_USAGE
    return EXIT_OK
