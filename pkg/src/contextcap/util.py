"""Shared helpers: text normalization, stable hashing, JSONL I/O."""

from __future__ import annotations

import hashlib
import json
import random
import unicodedata
from pathlib import Path
from typing import Any, Iterable, Iterator


def normalize_text(text: str) -> str:
    """Canonical caption form used for deduplication and equality checks.

    Unicode NFC, lowercased, runs of whitespace collapsed to a single
    space, leading and trailing whitespace stripped.
    """
    text = unicodedata.normalize("NFC", text).lower()
    return " ".join(text.split())


def nfc(text: str) -> str:
    return unicodedata.normalize("NFC", text)


def word_count(text: str) -> int:
    """Number of whitespace-separated tokens."""
    return len(text.split())


def stable_hash(*parts: object) -> int:
    """64-bit hash of the given parts, stable across runs and platforms.

    Never use the builtin hash() for anything persisted: it is salted
    per process.
    """
    h = hashlib.blake2b(digest_size=8)
    for part in parts:
        h.update(str(part).encode("utf-8"))
        h.update(b"\x1f")
    return int.from_bytes(h.digest(), "big")


def record_rng(seed: int, record_id: str) -> random.Random:
    """Per-record random stream, independent of processing order."""
    return random.Random(stable_hash(seed, record_id))


def read_jsonl(path: str | Path) -> Iterator[tuple[int, dict[str, Any]]]:
    """Yield (line_number, record) pairs from a JSON-lines file.

    Line numbers are 1-based; blank lines are skipped. Raises ValueError
    with the offending line number on malformed input.
    """
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{line_no}: invalid JSON: {exc.msg}") from exc
            if not isinstance(obj, dict):
                raise ValueError(f"{path}:{line_no}: expected a JSON object")
            yield line_no, obj


def write_jsonl(path: str | Path, rows: Iterable[dict[str, Any]]) -> int:
    """Write rows as JSON lines (UTF-8, no ASCII escaping); returns the count."""
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False))
            fh.write("\n")
            count += 1
    return count


def write_json(path: str | Path, obj: Any) -> None:
    """Write a single document with a stable key order."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, ensure_ascii=False, indent=2, sort_keys=True)
        fh.write("\n")
