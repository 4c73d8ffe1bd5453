"""OpenAI-compatible completions client for echoed prompt logprobs.

Sends {model, prompt, max_tokens: 0, echo: true, logprobs: 1} and reads
token strings, token logprobs, and text offsets from the response. When
the server omits text offsets, spans are recovered by greedy alignment.
"""

import os
import time
from typing import Optional

import requests

from ..corpus import CharSpan
from ..errors import BackendError
from .align import align_tokens, normalize_piece
from .records import TokenRecord

API_KEY_ENV = "CONFUSION_LENS_API_KEY"


class HttpLogprobClient:
    def __init__(
        self,
        endpoint: str,
        model: str,
        timeout: float = 60.0,
        max_retries: int = 3,
        backoff: float = 0.5,
        api_key: Optional[str] = None,
    ):
        self.endpoint = endpoint
        self.model = model
        self.timeout = timeout
        self.max_retries = max_retries
        self.backoff = backoff
        self.api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV)
        self._session = requests.Session()

    def _post(self, payload: dict) -> dict:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        last_exc = None
        for attempt in range(self.max_retries):
            try:
                resp = self._session.post(
                    self.endpoint, json=payload, headers=headers, timeout=self.timeout
                )
                if resp.status_code >= 500:
                    raise BackendError(f"server error {resp.status_code}")
                if resp.status_code != 200:
                    raise BackendError(
                        f"request failed with status {resp.status_code}: {resp.text[:200]}"
                    )
                return resp.json()
            except (requests.RequestException, BackendError) as exc:
                last_exc = exc
                if attempt + 1 < self.max_retries:
                    time.sleep(self.backoff * (2**attempt))
        raise BackendError(
            f"backend unreachable after {self.max_retries} attempts: {last_exc}"
        )

    def tokenize_with_logprobs(self, source: str) -> list[TokenRecord]:
        payload = {
            "model": self.model,
            "prompt": source,
            "max_tokens": 0,
            "echo": True,
            "logprobs": 1,
        }
        data = self._post(payload)
        try:
            lp = data["choices"][0]["logprobs"]
            tokens = lp["tokens"]
            logprobs = lp["token_logprobs"]
        except (KeyError, IndexError, TypeError) as exc:
            raise BackendError(f"response lacks logprobs: {exc}") from exc

        offsets = lp.get("text_offset")
        if offsets is not None:
            spans = []
            for i, start in enumerate(offsets):
                end = offsets[i + 1] if i + 1 < len(offsets) else len(source)
                spans.append(CharSpan(int(start), int(end)))
        else:
            spans = align_tokens(source, tokens)

        records = []
        for i, (piece, span) in enumerate(zip(tokens, spans)):
            records.append(
                TokenRecord(
                    index=i,
                    text=normalize_piece(piece),
                    span=span,
                    logprob=logprobs[i],
                )
            )
        return records
