# SPDX-FileCopyrightText: 2026 CPIseq developers
# SPDX-License-Identifier: MIT

"""JSON for schemas, config files and result metadata: streamed in with ijson, written
canonically with the standard library encoder."""

import json
from collections.abc import Iterator, Mapping
from typing import IO, Any

import ijson  # type: ignore

from .errors import DataError

Object = Mapping[str, Any]


def load_document(f: IO[bytes], /, seek: bool = True) -> Any:
    """Parses the whole document of a binary stream: a config object, a metadata line or a
    results file. Numbers come back as int or float, never Decimal."""
    if seek:
        f.seek(0)
    try:
        for document in ijson.items(f, "", use_float=True):
            return document
    except ijson.JSONError as e:
        raise DataError(f"malformed JSON: {e}") from e
    raise DataError("empty JSON document")


def iter_items(f: IO[bytes], path: str = "item", /, seek: bool = True) -> Iterator[Any]:
    """Streams the elements of the list at `path`, e.g. the columns of a schema file
    (`"item"`) or the rows of a results file (`"results.item"`)."""
    assert path == "item" or path.endswith(".item"), 'the last path component must be "item"'
    if seek:
        f.seek(0)
    try:
        yield from ijson.items(f, path, use_float=True)
    except ijson.JSONError as e:
        raise DataError(f"malformed JSON: {e}") from e


def dumps(obj: Any, readable: bool = False) -> str:
    """Serializes records and metadata. Readable output is indented with sorted keys;
    the compact form is used for hashing and single-line CSV metadata.

    >>> dumps({"seed": 1, "p": [0.5, 1.0]})
    '{"seed":1,"p":[0.5,1.0]}'
    """
    return json.dumps(
        obj,
        indent=2 if readable else None,
        separators=(",", ": ") if readable else (",", ":"),
        sort_keys=readable,
        allow_nan=False,
        default=_default,
    )


def _default(obj: Any) -> Any:
    # numpy scalars and arrays
    if hasattr(obj, "tolist"):
        return obj.tolist()
    raise TypeError(f"Object of type {type(obj).__name__} is not JSON serializable")
