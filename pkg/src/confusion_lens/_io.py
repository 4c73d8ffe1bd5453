"""Canonical JSON serialization for reproducible outputs.

All pipeline outputs round floats to 12 significant digits and sort object
keys, so byte-identical files can be diffed or used as golden files.
"""

import json
import math
from typing import Any, Iterable, Iterator

from .errors import DataError

SIG_DIGITS = 12


def round_floats(obj: Any) -> Any:
    """Recursively round every float to SIG_DIGITS significant digits."""
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return obj
        return float(f"{obj:.{SIG_DIGITS}g}")
    if isinstance(obj, dict):
        return {k: round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v) for v in obj]
    return obj


def dumps_canonical(obj: Any) -> str:
    return json.dumps(round_floats(obj), sort_keys=True, ensure_ascii=False)


def write_json(path, obj: Any) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_canonical(obj))
        fh.write("\n")


def write_jsonl(path, rows: Iterable[Any]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(dumps_canonical(row))
            fh.write("\n")


def read_jsonl(path) -> Iterator[tuple[int, Any]]:
    """Yield (line_number, parsed_object); line numbers are 1-based."""
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                yield lineno, json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}: malformed JSON on line {lineno}: {exc}") from exc
