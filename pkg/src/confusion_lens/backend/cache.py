"""Token-record cache and fixture replay.

Cache file and fixture file share one JSONL layout, one object per
snippet:

    {"snippet_id": ..., "key": ...(cache only),
     "tokens": [{"index","text","start","end","logprob"}]}

A fixture keyed by snippet_id replays recorded logprobs byte-identically;
the HTTP cache is keyed by (backend kind, model, source hash) so a warm
cache reproduces live responses without network access.
"""

import hashlib
import threading
from typing import Optional

from .._io import dumps_canonical, read_jsonl
from ..errors import DataError
from .records import TokenRecord, records_from_dicts, records_to_dicts


def cache_key(kind: str, model: str, source: str) -> str:
    h = hashlib.sha256()
    h.update(kind.encode("utf-8"))
    h.update(b"\x00")
    h.update(model.encode("utf-8"))
    h.update(b"\x00")
    h.update(source.encode("utf-8"))
    return h.hexdigest()


class RecordStore:
    """JSONL-backed store of token records, addressable by key or snippet id."""

    def __init__(self, path: Optional[str] = None):
        self.path = path
        self._by_key: dict[str, list[TokenRecord]] = {}
        self._by_snippet: dict[str, list[TokenRecord]] = {}
        self._lock = threading.Lock()
        if path is not None:
            self._load()

    def _load(self) -> None:
        import os

        if not os.path.exists(self.path):
            return
        for lineno, obj in read_jsonl(self.path):
            try:
                records = records_from_dicts(obj["tokens"])
                snippet_id = obj.get("snippet_id")
            except (KeyError, TypeError, ValueError) as exc:
                raise DataError(
                    f"{self.path}: corrupt cache line {lineno}: {exc}"
                ) from exc
            if "key" in obj:
                self._by_key[obj["key"]] = records
            if snippet_id is not None:
                self._by_snippet[snippet_id] = records

    def get_by_key(self, key: str) -> Optional[list[TokenRecord]]:
        return self._by_key.get(key)

    def get_by_snippet(self, snippet_id: str) -> Optional[list[TokenRecord]]:
        return self._by_snippet.get(snippet_id)

    def put(self, key: Optional[str], snippet_id: str, records: list[TokenRecord]) -> None:
        with self._lock:
            if key is not None:
                if key in self._by_key:
                    return
                self._by_key[key] = records
            self._by_snippet[snippet_id] = records
            if self.path is not None:
                row = {"snippet_id": snippet_id, "tokens": records_to_dicts(records)}
                if key is not None:
                    row["key"] = key
                with open(self.path, "a", encoding="utf-8") as fh:
                    fh.write(dumps_canonical(row))
                    fh.write("\n")


def load_fixture(path) -> RecordStore:
    store = RecordStore(path)
    if not store._by_snippet:
        raise DataError(f"{path}: fixture contains no snippets")
    return store
