"""Canonical JSON: UTF-8, sorted keys, two-space indent, trailing newline.

Every file this package persists goes through here so byte-stability is a
property, not an accident. Writes are crash-safe: temp file then rename.
"""
from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path


def canonical_dumps(obj: object) -> str:
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, indent=2) + "\n"


def write_json_atomic(path: Path, obj: object) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    data = canonical_dumps(obj)
    fd, tmp = tempfile.mkstemp(dir=str(path.parent), prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(data)
            handle.flush()
            os.fsync(handle.fileno())
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def read_json(path: Path) -> object:
    with open(path, encoding="utf-8") as handle:
        return json.load(handle)
