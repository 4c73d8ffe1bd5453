"""Greedy alignment of tokenizer pieces onto source character spans.

Subword tokenizers mark whitespace with sentinel characters; pieces are
normalized before matching so that e.g. "▁V1" matches " V1" in the
source. Alignment is strict: every piece must match at the current
cursor and the pieces must jointly cover the whole source.
"""

from ..corpus import CharSpan
from ..errors import AlignmentError

# Common whitespace sentinels: sentencepiece U+2581, GPT-2 byte-level
# space/newline/tab markers.
_MARKERS = {
    "▁": " ",
    "Ġ": " ",   # Ġ
    "Ċ": "\n",  # Ċ
    "ĉ": "\t",  # ĉ
}


def normalize_piece(piece: str) -> str:
    for marker, plain in _MARKERS.items():
        if marker in piece:
            piece = piece.replace(marker, plain)
    return piece


def align_tokens(source: str, pieces: list[str]) -> list[CharSpan]:
    """Map token pieces to a partition of [0, len(source))."""
    spans = []
    pos = 0
    for i, raw in enumerate(pieces):
        piece = normalize_piece(raw)
        if not piece:
            raise AlignmentError(f"token {i} is empty after normalization", pos)
        if not source.startswith(piece, pos):
            raise AlignmentError(
                f"token {i} ({raw!r}) does not match source", pos
            )
        spans.append(CharSpan(pos, pos + len(piece)))
        pos += len(piece)
    if pos != len(source):
        raise AlignmentError(
            f"pieces cover only {pos} of {len(source)} characters", pos
        )
    return spans
