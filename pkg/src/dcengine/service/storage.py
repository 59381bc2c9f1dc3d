"""File-backed JSON persistence for designs, surveys, and jobs.

One document per object under the data directory; every write goes to a
temp file in the same directory followed by an atomic rename, so a killed
process never leaves a half-written document behind.
"""

from __future__ import annotations

import json
import os
import re
import tempfile
from pathlib import Path

_ID_RE = re.compile(r"^[a-z]+-(\d+)$")


class Store:
    KINDS = ("designs", "surveys", "jobs")

    def __init__(self, data_dir: str | Path):
        self.root = Path(data_dir)
        for kind in self.KINDS:
            (self.root / kind).mkdir(parents=True, exist_ok=True)

    def _path(self, kind: str, obj_id: str) -> Path:
        if "/" in obj_id or obj_id.startswith("."):
            raise ValueError(f"bad object id {obj_id!r}")
        return self.root / kind / f"{obj_id}.json"

    def next_id(self, kind: str, prefix: str) -> str:
        highest = 0
        for path in (self.root / kind).glob(f"{prefix}-*.json"):
            m = _ID_RE.match(path.stem)
            if m:
                highest = max(highest, int(m.group(1)))
        return f"{prefix}-{highest + 1}"

    def save(self, kind: str, obj_id: str, doc: dict) -> None:
        path = self._path(kind, obj_id)
        fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
        try:
            with os.fdopen(fd, "w") as fh:
                json.dump(doc, fh)
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, path)
        finally:
            if os.path.exists(tmp):
                os.unlink(tmp)

    def load(self, kind: str, obj_id: str) -> dict | None:
        path = self._path(kind, obj_id)
        if not path.exists():
            return None
        with open(path) as fh:
            return json.load(fh)

    def list_ids(self, kind: str) -> list[str]:
        return sorted(p.stem for p in (self.root / kind).glob("*.json"))
