"""Snippet corpus loading and validation.

A corpus is a JSONL file, one snippet per line:

    {"id": ..., "pair_id": ..., "variant": "clean"|"confusing",
     "language": "java", "source": ..., "atom_category": ...,
     "aois": [{"start": ..., "end": ...}]}

Every pair_id must map to exactly one clean and one confusing snippet.
AOI spans are character offsets into ``source``, normalized to be sorted
by start offset at load time.
"""

from dataclasses import dataclass, field
from typing import Optional

from ._io import read_jsonl
from .errors import CorpusError

VARIANTS = ("clean", "confusing")


@dataclass(frozen=True, order=True)
class CharSpan:
    start: int
    end: int  # exclusive

    def __post_init__(self):
        if not (0 <= self.start < self.end):
            raise CorpusError(f"invalid span ({self.start},{self.end})")

    def overlaps(self, other: "CharSpan") -> bool:
        return self.start < other.end and other.start < self.end

    def length(self) -> int:
        return self.end - self.start


@dataclass(frozen=True)
class Snippet:
    id: str
    pair_id: str
    variant: str
    language: str
    source: str
    atom_category: Optional[str] = None
    aois: tuple = field(default_factory=tuple)

    def aoi_of(self, index: int) -> CharSpan:
        if not 0 <= index < len(self.aois):
            raise CorpusError(
                f"snippet {self.id}: AOI index {index} out of range "
                f"(has {len(self.aois)})"
            )
        return self.aois[index]

    def aoi_text(self, index: int) -> str:
        span = self.aoi_of(index)
        return self.source[span.start : span.end]


def _validate_snippet(obj: dict, lineno: int) -> Snippet:
    def fail(msg):
        raise CorpusError(f"line {lineno}: {msg}")

    for key in ("id", "pair_id", "variant", "language", "source"):
        if key not in obj:
            fail(f"missing field '{key}'")
    if obj["variant"] not in VARIANTS:
        fail(f"variant must be one of {VARIANTS}, got {obj['variant']!r}")
    source = obj["source"]
    if not isinstance(source, str):
        fail("source must be a string")

    aois = []
    for raw in obj.get("aois", []):
        try:
            span = CharSpan(int(raw["start"]), int(raw["end"]))
        except (KeyError, TypeError, ValueError, CorpusError) as exc:
            fail(f"bad AOI {raw!r}: {exc}")
        if span.end > len(source):
            fail(f"aoi out of bounds: ({span.start},{span.end}) in source of length {len(source)}")
        aois.append(span)
    aois.sort()
    for a, b in zip(aois, aois[1:]):
        if a.overlaps(b):
            fail(f"overlapping AOIs ({a.start},{a.end}) and ({b.start},{b.end})")

    return Snippet(
        id=str(obj["id"]),
        pair_id=str(obj["pair_id"]),
        variant=obj["variant"],
        language=obj["language"],
        source=source,
        atom_category=obj.get("atom_category"),
        aois=tuple(aois),
    )


class Corpus:
    """Validated snippet collection with a clean/confusing pair index."""

    def __init__(self, snippets: list[Snippet]):
        self.snippets = sorted(snippets, key=lambda s: s.id)
        self.by_id = {}
        for s in self.snippets:
            if s.id in self.by_id:
                raise CorpusError(f"duplicate snippet id {s.id!r}")
            self.by_id[s.id] = s

        grouped: dict[str, dict[str, Snippet]] = {}
        for s in self.snippets:
            slot = grouped.setdefault(s.pair_id, {})
            if s.variant in slot:
                raise CorpusError(
                    f"pair {s.pair_id!r}: more than one {s.variant} snippet"
                )
            slot[s.variant] = s
        for pid, slot in grouped.items():
            missing = [v for v in VARIANTS if v not in slot]
            if missing:
                raise CorpusError(f"pair {pid!r}: missing {missing[0]} variant")
        # pair_id -> (clean, confusing)
        self.pairs = {
            pid: (slot["clean"], slot["confusing"]) for pid, slot in grouped.items()
        }

    def __len__(self):
        return len(self.snippets)

    def __iter__(self):
        return iter(self.snippets)

    def variant(self, name: str) -> list[Snippet]:
        return [s for s in self.snippets if s.variant == name]


def load_corpus(path) -> Corpus:
    snippets = [_validate_snippet(obj, lineno) for lineno, obj in read_jsonl(path)]
    try:
        return Corpus(snippets)
    except CorpusError as exc:
        raise CorpusError(f"{path}: {exc}") from exc


def snippet_to_dict(snippet: Snippet) -> dict:
    out = {
        "id": snippet.id,
        "pair_id": snippet.pair_id,
        "variant": snippet.variant,
        "language": snippet.language,
        "source": snippet.source,
        "aois": [{"start": a.start, "end": a.end} for a in snippet.aois],
    }
    if snippet.atom_category is not None:
        out["atom_category"] = snippet.atom_category
    return out
