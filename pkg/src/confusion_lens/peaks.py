"""Prominence-based detection of single-token perplexity peaks.

Each detected peak is a single token whose detection-scale value stands
out from its surroundings by at least the prominence threshold. Peaks
seed candidate regions of confusion.
"""

import math
from dataclasses import dataclass

from ._kernels import local_maxima_prominences
from .errors import DataError
from .perplexity import PerplexityProfile

SCALES = ("surprisal", "raw_ppl", "log10_ppl")
DEFAULT_PROMINENCE = 0.8
DEFAULT_SCALE = "surprisal"


@dataclass(frozen=True)
class Peak:
    token_index: int  # position in the token record list
    value: float  # on the detection scale
    prominence: float


def find_peaks(signal, prominence_threshold: float) -> list[Peak]:
    """Local maxima with prominence >= threshold, in index order.

    Plateaus yield one peak at their leftmost index; boundary samples
    never qualify.
    """
    if len(signal) < 1:
        raise DataError("empty signal")
    if prominence_threshold <= 0:
        raise DataError("prominence threshold must be positive")
    idx, prom = local_maxima_prominences(signal)
    return [
        Peak(token_index=int(i), value=float(signal[int(i)]), prominence=float(p))
        for i, p in zip(idx, prom)
        if p >= prominence_threshold
    ]


def detection_signal(profile: PerplexityProfile, scale: str = DEFAULT_SCALE):
    """Per-token detection values and their positions in the record list.

    Unscored tokens (the first token) are not part of the signal.
    Returns (values, positions) where positions map signal samples back
    to record indices.
    """
    if scale not in SCALES:
        raise DataError(f"scale must be one of {SCALES}, got {scale!r}")
    values = []
    positions = []
    for pos, rec in enumerate(profile.records):
        if rec.logprob is None:
            continue
        surprisal = -rec.logprob
        if scale == "surprisal":
            values.append(surprisal)
        elif scale == "raw_ppl":
            values.append(math.exp(surprisal))
        else:
            values.append(surprisal / math.log(10))
        positions.append(pos)
    if not values:
        raise DataError(f"profile {profile.snippet_id}: no scored tokens")
    return values, positions


def find_profile_peaks(
    profile: PerplexityProfile,
    prominence_threshold: float = DEFAULT_PROMINENCE,
    scale: str = DEFAULT_SCALE,
) -> list[Peak]:
    """Detect peaks on a profile; token_index refers to record positions."""
    values, positions = detection_signal(profile, scale=scale)
    peaks = find_peaks(values, prominence_threshold)
    return [
        Peak(
            token_index=positions[p.token_index],
            value=p.value,
            prominence=p.prominence,
        )
        for p in peaks
    ]
