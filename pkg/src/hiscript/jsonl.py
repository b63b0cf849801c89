"""Canonical JSONL reading and writing (UTF-8, LF line endings)."""

from __future__ import annotations

import hashlib
import json
import logging
from pathlib import Path
from typing import Iterable, Iterator

from .errors import ValidationError
from .model import Script

log = logging.getLogger(__name__)


def dumps(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(", ", ": "))


def read_jsonl(path, strict=True) -> Iterator[dict]:
    """Yield one dict per non-blank line.

    With ``strict=False`` unparsable lines are logged and yielded as
    ``{"__error__": message, "__line__": n}`` so callers can count them.
    """
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                if not isinstance(rec, dict):
                    raise ValueError("record is not a JSON object")
            except ValueError as exc:
                if strict:
                    raise ValidationError(f"{path}:{n}: {exc}", "MALFORMED_JSONL") from exc
                log.warning("%s:%d: skipping unreadable record (%s)", path, n, exc)
                yield {"__error__": str(exc), "__line__": n}
                continue
            yield rec


def write_jsonl(path, records: Iterable[dict]) -> int:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    n = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(dumps(rec) + "\n")
            n += 1
    return n


def write_json(path, obj) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, ensure_ascii=False, indent=2, sort_keys=False)
        fh.write("\n")


def read_scripts(path) -> list[Script]:
    return [Script.from_dict(rec) for rec in read_jsonl(path)]


def write_scripts(path, scripts: Iterable[Script]) -> int:
    return write_jsonl(path, (s.to_dict() for s in scripts))


def file_sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()
