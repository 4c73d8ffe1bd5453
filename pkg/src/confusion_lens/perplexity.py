"""Per-token and aggregate perplexity over snippets and character spans.

Per-token perplexity is the inverse of the token's conditional
probability, exp(-logprob). The average over a span is the inverse
geometric mean of token probabilities, computed in log space and
exponentiated once; the maximum is the largest per-token value.

The first token carries no conditional logprob and is excluded from all
metrics unless ``include_first`` is set and the backend supplied an
unconditional probability for it.
"""

import math
from dataclasses import dataclass
from typing import Optional

from .backend.records import TokenRecord
from .corpus import CharSpan
from .errors import DataError


def included_indices(
    records: list[TokenRecord],
    include_first: bool = False,
    skip_whitespace: bool = False,
) -> list[int]:
    """Positions (into ``records``) of tokens that enter the metrics."""
    out = []
    for pos, rec in enumerate(records):
        if rec.logprob is None:
            continue
        if pos == 0 and not include_first:
            continue
        if skip_whitespace and rec.text.isspace():
            continue
        out.append(pos)
    return out


def intersecting_tokens(records: list[TokenRecord], span: CharSpan) -> list[int]:
    """Tokens overlapping the span by at least one character."""
    return [pos for pos, rec in enumerate(records) if rec.span.overlaps(span)]


def token_perplexities(
    records: list[TokenRecord], include_first: bool = False
) -> list[float]:
    idx = included_indices(records, include_first=include_first)
    if not idx:
        raise DataError("no scored tokens")
    return [math.exp(-records[i].logprob) for i in idx]


def _span_included(records, span, include_first, skip_whitespace):
    idx = included_indices(
        records, include_first=include_first, skip_whitespace=skip_whitespace
    )
    if span is not None:
        in_span = set(intersecting_tokens(records, span))
        idx = [i for i in idx if i in in_span]
    if not idx:
        raise DataError("no scored tokens in span")
    return idx


def avg_perplexity(
    records: list[TokenRecord],
    span: Optional[CharSpan] = None,
    include_first: bool = False,
    skip_whitespace: bool = False,
) -> float:
    """Inverse geometric mean of token probabilities over the span."""
    idx = _span_included(records, span, include_first, skip_whitespace)
    total = -sum(records[i].logprob for i in idx)
    return math.exp(total / len(idx))


def max_perplexity(
    records: list[TokenRecord],
    span: Optional[CharSpan] = None,
    include_first: bool = False,
    skip_whitespace: bool = False,
) -> float:
    """Highest single-token perplexity over the span."""
    idx = _span_included(records, span, include_first, skip_whitespace)
    return math.exp(max(-records[i].logprob for i in idx))


@dataclass(frozen=True)
class PerplexityProfile:
    snippet_id: str
    records: tuple  # TokenRecord, full coverage incl. unscored first token
    snippet_avg: float
    snippet_max: float

    def perplexity_of(self, pos: int) -> Optional[float]:
        lp = self.records[pos].logprob
        return None if lp is None else math.exp(-lp)


def build_profile(
    snippet_id: str,
    records: list[TokenRecord],
    include_first: bool = False,
    skip_whitespace: bool = False,
) -> PerplexityProfile:
    return PerplexityProfile(
        snippet_id=snippet_id,
        records=tuple(records),
        snippet_avg=avg_perplexity(
            records, include_first=include_first, skip_whitespace=skip_whitespace
        ),
        snippet_max=max_perplexity(
            records, include_first=include_first, skip_whitespace=skip_whitespace
        ),
    )


def profile_to_dict(profile: PerplexityProfile) -> dict:
    tokens = []
    for rec in profile.records:
        tokens.append(
            {
                "index": rec.index,
                "start": rec.start,
                "end": rec.end,
                "ppl": None if rec.logprob is None else math.exp(-rec.logprob),
            }
        )
    return {
        "snippet_id": profile.snippet_id,
        "snippet_avg": profile.snippet_avg,
        "snippet_max": profile.snippet_max,
        "tokens": tokens,
    }


def profile_from_dict(obj: dict, source: str) -> PerplexityProfile:
    """Rebuild a profile from its JSONL form; token text comes from the
    snippet source, logprob from -ln(ppl)."""
    records = []
    for row in obj["tokens"]:
        span = CharSpan(int(row["start"]), int(row["end"]))
        ppl = row.get("ppl")
        records.append(
            TokenRecord(
                index=int(row["index"]),
                text=source[span.start : span.end],
                span=span,
                logprob=None if ppl is None else -math.log(ppl),
            )
        )
    return PerplexityProfile(
        snippet_id=obj["snippet_id"],
        records=tuple(records),
        snippet_avg=float(obj["snippet_avg"]),
        snippet_max=float(obj["snippet_max"]),
    )
