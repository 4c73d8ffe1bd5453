"""Terminal heat-strip rendering of per-token perplexity.

One shaded cell per character, darker means higher surprisal; detected
regions are underlined on a second line. Inspection aid only, never a
machine-readable output.
"""

from .perplexity import PerplexityProfile

_SHADES = " ░▒▓█"


def _shade(surprisal: float, lo: float, hi: float) -> str:
    if hi <= lo:
        return _SHADES[0]
    frac = min(1.0, max(0.0, (surprisal - lo) / (hi - lo)))
    return _SHADES[min(len(_SHADES) - 1, int(frac * len(_SHADES)))]


def render_heat_strip(
    profile: PerplexityProfile, source: str, regions=None
) -> str:
    """Multi-line text: source, heat strip, and region underlines."""
    surprisals = [0.0] * len(source)
    values = [
        -r.logprob for r in profile.records if r.logprob is not None
    ]
    lo, hi = (min(values), max(values)) if values else (0.0, 0.0)
    for rec in profile.records:
        s = 0.0 if rec.logprob is None else -rec.logprob
        for i in range(rec.start, rec.end):
            surprisals[i] = s

    marks = [" "] * len(source)
    for region in regions or []:
        for i in range(region.span.start, min(region.span.end, len(source))):
            marks[i] = "^"

    lines = []
    offset = 0
    for raw_line in source.splitlines() or [""]:
        n = len(raw_line)
        heat = "".join(
            _shade(surprisals[offset + i], lo, hi) for i in range(n)
        )
        lines.append(raw_line)
        lines.append(heat)
        mark_line = "".join(marks[offset : offset + n])
        if mark_line.strip():
            lines.append(mark_line)
        offset += n + 1  # skip the newline
    lines.append(
        f"[{profile.snippet_id}] avg={profile.snippet_avg:.3g} "
        f"max={profile.snippet_max:.3g}"
    )
    return "\n".join(lines)
