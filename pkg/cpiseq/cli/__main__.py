# SPDX-FileCopyrightText: 2026 CPIseq developers
# SPDX-License-Identifier: MIT

import sys

from . import main

sys.exit(main())
