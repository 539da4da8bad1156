# SPDX-FileCopyrightText: 2026 CPIseq developers
# SPDX-License-Identifier: MIT

import csv
from collections.abc import Iterable, Mapping, Sequence
from io import BytesIO
from pathlib import Path
from typing import IO, Any

from .. import json
from ..errors import DataError
from ..tabular import Dataset, infer_schema, read_csv, read_schema

METADATA_PREFIX = "# metadata: "


def write_records(
    path: str | Path,
    records: Sequence[Mapping[str, Any]],
    metadata: Mapping[str, Any],
) -> None:
    """Writes result records as JSON ({"metadata", "results"}) or, for a .csv path,
    as CSV preceded by a single `# metadata:` comment line."""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        with path.open("w", encoding="utf-8", newline="") as f:
            write_csv_records(f, records, metadata)
    else:
        with path.open("w", encoding="utf-8") as f:
            f.write(json.dumps({"metadata": metadata, "results": records}, readable=True))
            f.write("\n")


def write_json(path: str | Path, obj: Any) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(json.dumps(obj, readable=True))
        f.write("\n")


def write_csv_records(
    f: IO[str],
    records: Sequence[Mapping[str, Any]],
    metadata: Mapping[str, Any],
    fields: Sequence[str] | None = None,
) -> None:
    f.write(METADATA_PREFIX)
    f.write(json.dumps(metadata))
    f.write("\n")
    w = csv.DictWriter(f, fields or _fields_of(records), lineterminator="\n")
    w.writeheader()
    w.writerows({k: _csv_value(v) for k, v in r.items()} for r in records)


def read_csv_records(path: str | Path) -> tuple[dict[str, Any] | None, list[dict[str, str]]]:
    """Reads a file written by `write_csv_records`, returning its metadata and rows."""
    with open(path, "r", encoding="utf-8", newline="") as f:
        first = f.readline()
        metadata: dict[str, Any] | None = None
        if first.startswith(METADATA_PREFIX):
            metadata = _parse_metadata(first.removeprefix(METADATA_PREFIX))
        else:
            f.seek(0)
        return metadata, list(csv.DictReader(f))


def _parse_metadata(line: str) -> dict[str, Any]:
    obj = json.load_document(BytesIO(line.encode("utf-8")))
    if not isinstance(obj, dict):
        raise DataError("metadata line doesn't hold a JSON object")
    return obj  # type: ignore


def _fields_of(records: Iterable[Mapping[str, Any]]) -> list[str]:
    fields = dict[str, None]()
    for r in records:
        fields.update(dict.fromkeys(r))
    return list(fields)


def _csv_value(v: Any) -> Any:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, dict)):
        return json.dumps(v)
    return v


def load_dataset(
    data: Path,
    schema: Path | None,
    target: str | None,
    categorical: Iterable[str] = (),
) -> Dataset:
    """Reads a CSV with an explicit schema file, or infers the schema from its header
    (with `categorical` naming the categorical columns)."""
    if schema is not None:
        columns = read_schema(schema)
    else:
        columns = infer_schema(data, categorical)
    return read_csv(data, columns, target)
