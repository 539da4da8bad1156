# SPDX-FileCopyrightText: 2026 CPIseq developers
# SPDX-License-Identifier: MIT

import hashlib
import shutil
from pathlib import Path

from impuls import HTTPResource, Resource, Task, TaskRuntime

from ..errors import DataError

DOWNLOAD = "download"


def fetch_resources(url: str) -> dict[str, Resource]:
    return {DOWNLOAD: HTTPResource.get(url)}


def sha256_of(path: Path) -> str:
    h = hashlib.sha256()
    with path.open("rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def install_verified(source: Path, target: Path, expected_sha256: str | None) -> str:
    """Copies `source` to `target` if its digest matches; a mismatching target is removed."""
    target.parent.mkdir(parents=True, exist_ok=True)
    shutil.copyfile(source, target)
    digest = sha256_of(target)
    if expected_sha256 and digest != expected_sha256.strip().lower():
        target.unlink(missing_ok=True)
        raise DataError(f"checksum mismatch for {target}: expected {expected_sha256}, got {digest}")
    return digest


class FetchFile(Task):
    def __init__(self, output: str, sha256: str | None = None) -> None:
        super().__init__()
        self.output = Path(output)
        self.sha256 = sha256

    def execute(self, r: TaskRuntime) -> None:
        digest = install_verified(r.resources[DOWNLOAD].stored_at, self.output, self.sha256)
        self.logger.info("Saved %s (sha256 %s)", self.output, digest)
