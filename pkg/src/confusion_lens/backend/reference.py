"""Built-in deterministic reference model: character n-gram with add-1
smoothing over a fixed 256-symbol alphabet.

Emits one token per character. The first character carries no
conditional logprob; character i is scored against the preceding
min(i, order-1) characters, so positions near the start use the longest
context available. Deterministic given the training texts, which makes
injected-anomaly tests meaningful.
"""

import math
from collections import Counter, defaultdict

from ..corpus import CharSpan
from ..errors import DataError
from .records import TokenRecord

ALPHABET_SIZE = 256


def _check_alphabet(text: str, what: str) -> None:
    for ch in text:
        if ord(ch) >= ALPHABET_SIZE:
            raise DataError(
                f"{what} contains character {ch!r} outside the reference "
                f"model's {ALPHABET_SIZE}-symbol alphabet"
            )


class CharNgramModel:
    """Order-k character model; contexts of length 0..k-1 are all counted."""

    def __init__(self, order: int = 3):
        if order < 1:
            raise ValueError("order must be >= 1")
        self.order = order
        # context string -> Counter of next characters
        self._counts: dict[str, Counter] = defaultdict(Counter)
        self._totals: dict[str, int] = defaultdict(int)

    def train(self, texts) -> "CharNgramModel":
        for text in texts:
            _check_alphabet(text, "training text")
            for i in range(len(text)):
                ch = text[i]
                for ctx_len in range(self.order):
                    if ctx_len > i:
                        break
                    ctx = text[i - ctx_len : i]
                    self._counts[ctx][ch] += 1
                    self._totals[ctx] += 1
        return self

    def prob(self, context: str, char: str) -> float:
        """Add-1 smoothed P(char | last (order-1) chars of context)."""
        ctx = context[-(self.order - 1) :] if self.order > 1 else ""
        count = self._counts[ctx][char] if ctx in self._counts else 0
        total = self._totals.get(ctx, 0)
        return (count + 1.0) / (total + ALPHABET_SIZE)

    def logprob(self, context: str, char: str) -> float:
        return math.log(self.prob(context, char))

    def tokenize(self, source: str) -> list[TokenRecord]:
        _check_alphabet(source, "source")
        if not source:
            raise DataError("empty source")
        records = []
        for i, ch in enumerate(source):
            lp = None if i == 0 else self.logprob(source[:i], ch)
            records.append(
                TokenRecord(index=i, text=ch, span=CharSpan(i, i + 1), logprob=lp)
            )
        return records
