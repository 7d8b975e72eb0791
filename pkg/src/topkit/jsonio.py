"""Canonical JSON writing so identical inputs yield byte-identical files."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path


def dump_json(obj, path) -> None:
    """Write obj as UTF-8 JSON with 2-space indent and a trailing newline.

    Key order is whatever the caller built into its dicts, so serializers
    are responsible for emitting keys in schema order.
    """
    text = json.dumps(obj, ensure_ascii=False, indent=2)
    Path(path).write_text(text + "\n", encoding="utf-8")


def load_json(path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: not valid JSON ({exc})") from None


def file_sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
