"""Logprob backends: HTTP endpoint, recorded-fixture replay, or the
built-in character n-gram reference model.

All three produce lists of :class:`TokenRecord` whose spans partition
the snippet source. HTTP responses are cached so repeated runs are
reproducible offline.
"""

from dataclasses import dataclass, field
from typing import Optional

from ..corpus import Snippet
from ..errors import BackendError, DataError
from .align import align_tokens, normalize_piece
from .cache import RecordStore, cache_key, load_fixture
from .http import HttpLogprobClient
from .records import (
    TokenRecord,
    records_from_dicts,
    records_to_dicts,
    validate_records,
)
from .reference import CharNgramModel

KINDS = ("http", "file", "reference")


@dataclass
class BackendConfig:
    kind: str
    endpoint: Optional[str] = None  # http
    model: str = "default"
    path: Optional[str] = None  # file
    order: int = 3  # reference
    timeout: float = 60.0
    max_retries: int = 3
    train_on: str = "clean"  # reference: clean | all

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DataError(f"backend kind must be one of {KINDS}, got {self.kind!r}")
        if self.kind == "http" and not self.endpoint:
            raise DataError("http backend requires an endpoint URL")
        if self.kind == "file" and not self.path:
            raise DataError("file backend requires a fixture path")

    @classmethod
    def from_spec(cls, spec: str, **kwargs) -> "BackendConfig":
        """Parse a CLI backend spec: http:URL | file:PATH | reference."""
        if spec == "reference":
            return cls(kind="reference", **kwargs)
        if spec.startswith(("http://", "https://")):
            return cls(kind="http", endpoint=spec, **kwargs)
        if spec.startswith("http:"):
            return cls(kind="http", endpoint=spec[len("http:") :], **kwargs)
        if spec.startswith("file:"):
            return cls(kind="file", path=spec[len("file:") :], **kwargs)
        raise DataError(f"unrecognized backend spec {spec!r}")


class Backend:
    """Resolved backend ready to tokenize snippets."""

    def __init__(
        self,
        config: BackendConfig,
        cache: Optional[RecordStore] = None,
        training_texts: Optional[list[str]] = None,
    ):
        self.config = config
        self.cache = cache
        self._fixture = None
        self._client = None
        self._model = None
        if config.kind == "file":
            self._fixture = load_fixture(config.path)
        elif config.kind == "http":
            self._client = HttpLogprobClient(
                endpoint=config.endpoint,
                model=config.model,
                timeout=config.timeout,
                max_retries=config.max_retries,
            )
        elif config.kind == "reference":
            if training_texts is None:
                raise DataError("reference backend requires training texts")
            self._model = CharNgramModel(order=config.order).train(training_texts)

    def tokenize(self, snippet: Snippet) -> list[TokenRecord]:
        if not snippet.source:
            raise DataError(f"snippet {snippet.id}: empty source")

        if self.config.kind == "reference":
            records = self._model.tokenize(snippet.source)
        elif self.config.kind == "file":
            records = self._fixture.get_by_snippet(snippet.id)
            if records is None:
                raise DataError(
                    f"fixture {self.config.path} has no entry for snippet {snippet.id}"
                )
        else:
            key = cache_key(self.config.kind, self.config.model, snippet.source)
            records = self.cache.get_by_key(key) if self.cache else None
            if records is None:
                records = self._client.tokenize_with_logprobs(snippet.source)
                validate_records(snippet.source, records)
                if self.cache:
                    self.cache.put(key, snippet.id, records)
            return records

        validate_records(snippet.source, records)
        return records


def make_backend(
    config: BackendConfig,
    corpus=None,
    cache_path: Optional[str] = None,
) -> Backend:
    """Construct a backend; the reference model trains on the corpus."""
    cache = RecordStore(cache_path) if cache_path else None
    training = None
    if config.kind == "reference":
        if corpus is None:
            raise DataError("reference backend requires a corpus to train on")
        snippets = corpus.variant("clean") if config.train_on == "clean" else list(corpus)
        training = [s.source for s in snippets]
    return Backend(config, cache=cache, training_texts=training)


def tokenize_with_logprobs(
    snippet: Snippet, config: BackendConfig, corpus=None, cache_path=None
) -> list[TokenRecord]:
    """One-shot convenience wrapper around :class:`Backend`."""
    return make_backend(config, corpus=corpus, cache_path=cache_path).tokenize(snippet)


__all__ = [
    "Backend",
    "BackendConfig",
    "BackendError",
    "CharNgramModel",
    "HttpLogprobClient",
    "RecordStore",
    "TokenRecord",
    "align_tokens",
    "cache_key",
    "make_backend",
    "normalize_piece",
    "records_from_dicts",
    "records_to_dicts",
    "tokenize_with_logprobs",
    "validate_records",
]
