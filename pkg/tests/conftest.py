import json
import math

import pytest

from confusion_lens.backend.records import TokenRecord
from confusion_lens.corpus import CharSpan


def make_records(logprobs, first_unscored=True, texts=None):
    """Single-character tokens; logprobs[i] scores token i. When
    first_unscored, token 0 gets logprob None and the given logprobs
    score tokens 1..n."""
    records = []
    if first_unscored:
        logprobs = [None] + list(logprobs)
    for i, lp in enumerate(logprobs):
        text = texts[i] if texts else "x"
        records.append(
            TokenRecord(index=i, text=text, span=CharSpan(i, i + 1), logprob=lp)
        )
    return records


def records_from_probs(probs, first_unscored=True, texts=None):
    return make_records([math.log(p) for p in probs], first_unscored, texts)


def records_for_source(source, logprobs):
    """One token per character of ``source``; logprobs[0] must be None."""
    assert len(source) == len(logprobs)
    return [
        TokenRecord(index=i, text=source[i], span=CharSpan(i, i + 1), logprob=lp)
        for i, lp in enumerate(logprobs)
    ]


def write_corpus(path, snippets):
    with open(path, "w") as fh:
        for s in snippets:
            fh.write(json.dumps(s) + "\n")
    return path


def snippet_dict(sid, pair_id, variant, source, aois=(), language="java", **extra):
    row = {
        "id": sid,
        "pair_id": pair_id,
        "variant": variant,
        "language": language,
        "source": source,
        "aois": [{"start": a, "end": b} for a, b in aois],
    }
    row.update(extra)
    return row


@pytest.fixture
def mini_corpus_path():
    from importlib import resources

    return str(
        resources.files("confusion_lens.data").joinpath("atoms_mini.jsonl")
    )
