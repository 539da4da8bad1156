# SPDX-FileCopyrightText: 2026 CPIseq developers
# SPDX-License-Identifier: MIT

"""Declarative sub-command options and the resolved per-run configuration.

Every option is declared once and used both to register the argparse flag and to
coerce values read from a `--config` JSON file. Resolution order: defaults, then the
config file, then flags given explicitly on the command line.
"""

import hashlib
from argparse import ArgumentParser, Namespace
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import Any

from .. import __version__, json


def int_list(text: str) -> tuple[int, ...]:
    """
    >>> int_list("500, 1000,2000")
    (500, 1000, 2000)
    """
    try:
        values = tuple(int(i) for i in text.split(",") if i.strip())
    except ValueError:
        raise ValueError(f"expected a comma-separated list of integers, got {text!r}") from None
    if not values:
        raise ValueError("expected at least one integer")
    return values


def str_list(text: str) -> tuple[str, ...]:
    """
    >>> str_list("cpi-seq,pfi")
    ('cpi-seq', 'pfi')
    """
    values = tuple(i.strip() for i in text.split(",") if i.strip())
    if not values:
        raise ValueError("expected at least one value")
    return values


def optional_int(text: str) -> int | None:
    return None if text.lower() in {"", "none"} else int(text)


@dataclass(frozen=True)
class Option:
    flag: str
    type: Callable[[str], Any] = str
    default: Any = None
    help: str = ""
    choices: Sequence[str] | None = None
    required: bool = False
    switch: bool = False

    @property
    def dest(self) -> str:
        return self.flag.removeprefix("--").replace("-", "_")

    def add_to(self, parser: ArgumentParser) -> None:
        # argparse defaults are None so that explicitly passed flags can be told apart
        if self.switch:
            parser.add_argument(self.flag, action="store_true", default=None, help=self.help)
        else:
            parser.add_argument(
                self.flag,
                type=self.type,
                choices=self.choices,
                default=None,
                help=f"{self.help} (default: {self.default})" if self.help else None,
            )

    def coerce(self, value: Any) -> Any:
        """Converts a config-file value to the type the flag would have produced."""
        if self.switch:
            if not isinstance(value, bool):
                raise ValueError(f"config option {self.dest!r} must be a boolean")
            return value
        if value is None:
            return None
        if isinstance(value, list):
            text = ",".join(str(i) for i in value)  # type: ignore
        elif isinstance(value, bool):
            raise ValueError(f"config option {self.dest!r} can't be a boolean")
        else:
            text = str(value)
        converted = self.type(text)
        if self.choices is not None and converted not in self.choices:
            raise ValueError(
                f"config option {self.dest!r}: {converted!r} is not one of {list(self.choices)}"
            )
        return converted


COMMON = [
    Option("--seed", int, 1, "seed for every random draw of the run"),
    Option("--workers", int, 1, "number of parallel workers"),
]

METHODS = ("cpi-seq", "cpi-gauss", "pfi", "loco")
ORIENTATIONS = ("knockoff_minus_original", "original_minus_knockoff")
LOSSES = ("mse", "log_loss")
SCENARIOS = ("dag", "grid", "confounder")
TARGETS = ("regression", "classification")
SAMPLERS = ("sequential", "gaussian")

ENET = [
    Option("--enet-alpha", float, 0.5, "elastic-net mixing parameter of the sequential sampler"),
    Option("--enet-lambdas", int, 20, "length of the cross-validated lambda path"),
    Option("--min-level-count", int, 5, "minimum count of a categorical level"),
]

SCENARIO = [
    Option("--scenario", str, "dag", "simulation scenario", choices=SCENARIOS),
    Option("--beta", float, 0.5, "effect size of the dag scenario"),
    Option("--x1-levels", optional_int, None, "make X1 categorical with this many levels"),
    Option("--x3-levels", optional_int, None, "make X3 categorical with this many levels"),
    Option("--all-levels", optional_int, None, "make every dag variable categorical"),
    Option("--rho", float, 0.5, "within-pair correlation of the grid scenario"),
    Option("--c", int, 2, "level count of the grid scenario's categoricals"),
    Option("--task", str, "regression", "type of the generated target", choices=TARGETS),
    Option("--snr", float, 2.0, "signal-to-noise ratio of grid regression targets"),
    Option("--ber", float, 0.2, "Bayes error rate of grid classification targets"),
    Option("--strength", float, 1.0, "confounding strength of the confounder scenario"),
]

ROWS = Option("--n", int, None, "number of generated rows (scenario default if unset)")

OPTIONS: dict[str, list[Option]] = {
    "analyze": [
        Option("--data", str, None, "input CSV file", required=True),
        Option("--schema", str, None, "schema JSON file (inferred from the CSV if unset)"),
        Option(
            "--categorical",
            str_list,
            (),
            "categorical columns for schema inference, comma-separated",
        ),
        Option("--target", str, None, "name of the target column", required=True),
        Option("--learner", str, "rf", "learner spec, e.g. 'rf(trees=500)' or 'linear'"),
        Option("--method", str, "cpi-seq", "importance method", choices=METHODS),
        Option("--loss", str, None, "instance loss (task default if unset)", choices=LOSSES),
        Option("--alpha", float, 0.05, "significance level"),
        Option("--train-fraction", float, 2 / 3, "share of rows used for fitting"),
        Option("--orientation", str, ORIENTATIONS[0], "sign of deltas", choices=ORIENTATIONS),
        Option("--redraw-per-group", switch=True, default=False, help="fresh knockoffs per group"),
        Option("--permutations", int, 5, "permutation repeats of pfi"),
        Option("--round-filter", str, None, "keep rows with |a - b| < tol, given as 'a,b,tol'"),
        *ENET,
        Option("--output", str, "results.json", "results file (.json or .csv)"),
    ],
    "simulate": [
        *SCENARIO,
        ROWS,
        Option("--output", str, "simulated", "output path prefix"),
    ],
    "benchmark": [
        *SCENARIO,
        Option("--methods", str_list, ("cpi-seq",), "importance methods, comma-separated"),
        Option("--learner", str, "rf(trees=100)", "learner spec"),
        Option("--replicates", int, 10, "replicates per sample size"),
        Option("--n-list", int_list, (500, 1000, 2000), "sample sizes, comma-separated"),
        Option("--alpha", float, 0.05, "significance level"),
        Option("--train-fraction", float, 2 / 3, "share of rows used for fitting"),
        Option("--permutations", int, 5, "permutation repeats of pfi"),
        Option("--top-k", int, None, "detection cut-off (number of relevant features if unset)"),
        *ENET,
        Option("--rows", str, "benchmark_rows.csv", "incrementally written per-replicate rows"),
        Option("--output", str, "benchmark_summary.csv", "aggregated summary CSV"),
    ],
    "knockoff-diagnostics": [
        Option("--data", str, None, "input CSV file (a simulated scenario if unset)"),
        Option("--schema", str, None, "schema JSON file (inferred from the CSV if unset)"),
        Option("--categorical", str_list, (), "categorical columns for schema inference"),
        Option("--target", str, None, "target column to leave out"),
        Option("--sampler", str, "sequential", "knockoff sampler", choices=SAMPLERS),
        Option("--tolerance", float, 0.02, "largest acceptable moment discrepancy"),
        *SCENARIO,
        ROWS,
        *ENET,
        Option("--output", str, "diagnostics.json", "report JSON file"),
    ],
    "fetch": [
        Option("--url", str, None, "URL to download", required=True),
        Option("--output", str, None, "destination file", required=True),
        Option("--sha256", str, None, "expected SHA-256 hex digest"),
    ],
}


def options_of(command: str) -> list[Option]:
    return OPTIONS[command] + (COMMON if command != "fetch" else [])


def read_config_file(path: str) -> dict[str, Any]:
    with open(path, "rb") as f:
        obj = json.load_document(f)
    if not isinstance(obj, dict):
        raise ValueError(f"config file {path} must contain a JSON object")
    return {str(k).replace("-", "_"): v for k, v in obj.items()}  # type: ignore


@dataclass(frozen=True)
class RunConfig:
    command: str
    values: dict[str, Any] = field(default_factory=dict[str, Any])

    def __getitem__(self, name: str) -> Any:
        return self.values[name]

    @property
    def seed(self) -> int:
        return int(self.values.get("seed", 0))

    @property
    def workers(self) -> int:
        return int(self.values.get("workers", 1))

    def canonical(self) -> str:
        return json.dumps(dict(sorted({"command": self.command, **self.values}.items())))

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical().encode("utf-8")).hexdigest()

    def metadata(self, **method: Any) -> dict[str, Any]:
        """Run metadata embedded in every output file."""
        return {
            "version": __version__,
            "command": self.command,
            "seed": self.values.get("seed"),
            "config_hash": self.config_hash(),
            "config": {"command": self.command, **self.values},
            "method": method,
        }


def resolve(command: str, args: Namespace) -> RunConfig:
    """Merges defaults, the optional --config file and explicit flags."""
    options = options_of(command)
    values = {o.dest: o.default for o in options}

    config_path: str | None = getattr(args, "config", None)
    if config_path:
        by_dest = {o.dest: o for o in options}
        for key, value in read_config_file(config_path).items():
            if key == "command":
                continue
            if key not in by_dest:
                raise ValueError(f"unknown option {key!r} in config file {config_path}")
            values[key] = by_dest[key].coerce(value)

    for o in options:
        if (explicit := getattr(args, o.dest, None)) is not None:
            values[o.dest] = explicit

    missing = [o.flag for o in options if o.required and values[o.dest] is None]
    if missing:
        raise ValueError(f"{command}: missing required option(s): {', '.join(missing)}")

    for o in options:
        if isinstance(values[o.dest], list):
            values[o.dest] = tuple(values[o.dest])  # type: ignore
    return RunConfig(command, values)

