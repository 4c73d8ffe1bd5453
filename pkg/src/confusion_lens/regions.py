"""Grow perplexity peaks into syntactically coherent regions of confusion.

A region starts as a single peak token and absorbs neighbors by lexical
rules (identifier/number coalescing, operator-operand resolution) until
a fixpoint, bounded by statement terminators and brackets. Nearby
regions are then merged, and regions are flagged for overlap with
annotated areas of interest.
"""

from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional

from .backend.records import TokenRecord
from .corpus import CharSpan, Snippet
from .peaks import Peak
from .perplexity import avg_perplexity, intersecting_tokens, max_perplexity

DEFAULT_GAP_TOKENS = 1


class LexClass(str, Enum):
    IDENTIFIER_PART = "identifier_part"
    NUMBER = "number"
    OPERATOR = "operator"
    BRACKET = "bracket"
    PUNCTUATION = "punctuation"
    WHITESPACE = "whitespace"
    KEYWORD = "keyword"
    OTHER = "other"


JAVA_KEYWORDS = frozenset(
    """abstract assert boolean break byte case catch char class const continue
    default do double else enum extends final finally float for goto if
    implements import instanceof int interface long native new package private
    protected public return short static strictfp super switch synchronized
    this throw throws transient try void volatile while var record yield
    true false null""".split()
)

OPERATOR_CHARS = frozenset("+-*/%=!<>&|^~?")
BRACKET_CHARS = frozenset("()[]{}")
PUNCTUATION_CHARS = frozenset(";,.:")

# Multi-character operators recognized when coalescing adjacent operator
# tokens (single-character tokenizations split these).
MULTI_CHAR_OPERATORS = frozenset(
    [
        "++", "--", "==", "!=", "<=", ">=", "&&", "||", "<<", ">>", ">>>",
        "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=", "->",
    ]
)
UPDATE_OPERATORS = frozenset(["++", "--"])
UNARY_PREFIX_OPERATORS = frozenset(["!", "~"])


def classify(token_text: str, language: str = "java") -> LexClass:
    """Total lexical classification of a token text."""
    if token_text == "" or token_text.isspace():
        return LexClass.WHITESPACE
    t = token_text.strip()
    if language == "java" and t in JAVA_KEYWORDS:
        return LexClass.KEYWORD
    if all(c in OPERATOR_CHARS for c in t):
        return LexClass.OPERATOR
    if all(c in BRACKET_CHARS for c in t):
        return LexClass.BRACKET
    if all(c in PUNCTUATION_CHARS for c in t):
        return LexClass.PUNCTUATION
    if t[0].isdigit():
        return LexClass.NUMBER
    if t[0].isalpha() or t[0] == "_":
        return LexClass.IDENTIFIER_PART
    return LexClass.OTHER


@dataclass(frozen=True)
class Region:
    snippet_id: str
    span: CharSpan
    token_indices: tuple  # contiguous positions into the record list
    peak_index: int
    max_ppl: float
    avg_ppl: float
    category: Optional[str] = None
    label: Optional[str] = None

    def text(self, records: list[TokenRecord]) -> str:
        return "".join(records[i].text for i in self.token_indices)


def _region(snippet_id, records, lo, hi, peak_index, language="java") -> Region:
    span = CharSpan(records[lo].start, records[hi].end)
    return Region(
        snippet_id=snippet_id,
        span=span,
        token_indices=tuple(range(lo, hi + 1)),
        peak_index=peak_index,
        max_ppl=max_perplexity(records, span),
        avg_ppl=avg_perplexity(records, span),
    )


class _Expander:
    """Fixpoint expansion of one peak; operates on record positions."""

    def __init__(self, records: list[TokenRecord], language: str):
        self.records = records
        self.language = language
        self.cls = [classify(r.text, language) for r in records]

    def _stripped(self, i: int) -> str:
        return self.records[i].text.strip()

    def _no_ws_join(self, left: int, right: int) -> bool:
        lt = self.records[left].text
        rt = self.records[right].text
        return bool(lt) and bool(rt) and not lt[-1].isspace() and not rt[0].isspace()

    def _is_operand(self, i: int) -> bool:
        return self.cls[i] in (LexClass.IDENTIFIER_PART, LexClass.NUMBER)

    def _skip_ws(self, i: int, step: int) -> Optional[int]:
        """Nearest non-whitespace position from i (exclusive) going step."""
        j = i + step
        while 0 <= j < len(self.records) and self.cls[j] is LexClass.WHITESPACE:
            j += step
        return j if 0 <= j < len(self.records) else None

    def _coalesce_words(self, lo: int, hi: int):
        # identifier/number fragments split by the tokenizer rejoin
        changed = True
        while changed:
            changed = False
            if self._is_operand(lo) and lo > 0 and self._is_operand(lo - 1) and self._no_ws_join(lo - 1, lo):
                lo -= 1
                changed = True
            if (
                self._is_operand(hi)
                and hi + 1 < len(self.records)
                and self._is_operand(hi + 1)
                and self._no_ws_join(hi, hi + 1)
            ):
                hi += 1
                changed = True
        return lo, hi

    def _coalesce_operator(self, lo: int, hi: int):
        # single-character operator tokens rejoin into known operators
        changed = True
        while changed:
            changed = False
            text = "".join(self._stripped(i) for i in range(lo, hi + 1))
            if (
                lo > 0
                and self.cls[lo - 1] is LexClass.OPERATOR
                and self._no_ws_join(lo - 1, lo)
                and (self._stripped(lo - 1) + text) in MULTI_CHAR_OPERATORS
            ):
                lo -= 1
                changed = True
                continue
            if (
                hi + 1 < len(self.records)
                and self.cls[hi + 1] is LexClass.OPERATOR
                and self._no_ws_join(hi, hi + 1)
                and (text + self._stripped(hi + 1)) in MULTI_CHAR_OPERATORS
            ):
                hi += 1
                changed = True
        return lo, hi

    def _operand_at(self, edge: int, step: int):
        """Single-token operand next to ``edge``, allowing one whitespace
        token between for binary operators. Returns (operand_pos, new_edge)
        or None."""
        j = edge + step
        hops = 0
        while 0 <= j < len(self.records) and self.cls[j] is LexClass.WHITESPACE:
            j += step
            hops += 1
            if hops > 1:
                return None
        if 0 <= j < len(self.records) and self._is_operand(j):
            return j
        return None

    def expand(self, peak_pos: int) -> tuple[int, int]:
        lo = hi = peak_pos
        changed = True
        while changed:
            changed = False
            nlo, nhi = self._coalesce_words(lo, hi)
            if (nlo, nhi) != (lo, hi):
                lo, hi = nlo, nhi
                changed = True
                continue

            region_text = "".join(self._stripped(i) for i in range(lo, hi + 1))
            region_classes = {self.cls[i] for i in range(lo, hi + 1)} - {
                LexClass.WHITESPACE
            }

            if region_classes == {LexClass.OPERATOR}:
                nlo, nhi = self._coalesce_operator(lo, hi)
                if (nlo, nhi) != (lo, hi):
                    lo, hi = nlo, nhi
                    changed = True
                    continue
                if region_text in UPDATE_OPERATORS:
                    # update operators bind one adjacent operand; the
                    # postfix form (left operand) takes precedence
                    if lo > 0 and self._is_operand(lo - 1) and self._no_ws_join(lo - 1, lo):
                        lo -= 1
                        changed = True
                        continue
                    if (
                        hi + 1 < len(self.records)
                        and self._is_operand(hi + 1)
                        and self._no_ws_join(hi, hi + 1)
                    ):
                        hi += 1
                        changed = True
                        continue
                elif region_text in UNARY_PREFIX_OPERATORS:
                    if (
                        hi + 1 < len(self.records)
                        and self._is_operand(hi + 1)
                        and self._no_ws_join(hi, hi + 1)
                    ):
                        hi += 1
                        changed = True
                        continue
                else:
                    left = self._operand_at(lo, -1)
                    right = self._operand_at(hi, +1)
                    if left is not None and right is not None:
                        lo, hi = left, right
                        changed = True
                        continue

            if region_classes == {LexClass.NUMBER}:
                # negative literal: absorb a sign whose own left neighbor
                # is an operator or bracket
                if (
                    lo > 0
                    and self._stripped(lo - 1) in ("-", "+")
                    and self.cls[lo - 1] is LexClass.OPERATOR
                    and self._no_ws_join(lo - 1, lo)
                ):
                    before = self._skip_ws(lo - 1, -1)
                    if before is not None and self.cls[before] in (
                        LexClass.OPERATOR,
                        LexClass.BRACKET,
                    ):
                        lo -= 1
                        changed = True
                        continue
        return lo, hi


def expand(
    peak: Peak,
    records: list[TokenRecord],
    snippet_id: str = "",
    language: str = "java",
) -> Region:
    """Grow a peak into a region by lexical rules applied to fixpoint."""
    lo, hi = _Expander(records, language).expand(peak.token_index)
    return _region(snippet_id, records, lo, hi, peak.token_index, language)


def _detection_value(records: list[TokenRecord], pos: int) -> float:
    lp = records[pos].logprob
    return float("-inf") if lp is None else -lp


def merge(
    regions: list[Region],
    records: list[TokenRecord],
    gap_tokens: int = DEFAULT_GAP_TOKENS,
    language: str = "java",
) -> list[Region]:
    """Merge overlapping regions and regions separated by at most
    ``gap_tokens`` non-whitespace tokens. Deterministic and
    order-independent: input is sorted before a transitive left-to-right
    pass."""
    if not regions:
        return []
    cls = [classify(r.text, language) for r in records]
    ordered = sorted(regions, key=lambda r: (r.span.start, r.span.end))
    merged: list[tuple[int, int, int]] = []  # (lo, hi, peak)
    for reg in ordered:
        lo, hi = reg.token_indices[0], reg.token_indices[-1]
        if merged:
            plo, phi, ppeak = merged[-1]
            gap = sum(
                1
                for i in range(phi + 1, lo)
                if cls[i] is not LexClass.WHITESPACE
            )
            if lo <= phi + 1 or gap <= gap_tokens:
                # keep the peak with the higher detection value; earlier
                # peak wins ties
                best = ppeak
                if _detection_value(records, reg.peak_index) > _detection_value(
                    records, best
                ):
                    best = reg.peak_index
                merged[-1] = (plo, max(phi, hi), best)
                continue
        merged.append((lo, hi, reg.peak_index))
    snippet_id = regions[0].snippet_id
    return [
        _region(snippet_id, records, lo, hi, peak, language)
        for lo, hi, peak in merged
    ]


def overlaps_aoi(region: Region, snippet: Snippet, records: list[TokenRecord]) -> bool:
    """True iff the region shares at least one token with any AOI."""
    region_tokens = set(region.token_indices)
    for aoi in snippet.aois:
        if region_tokens & set(intersecting_tokens(records, aoi)):
            return True
    return False


def aoi_hits(
    regions: list[Region], snippet: Snippet, records: list[TokenRecord]
) -> list[bool]:
    """Per-AOI flag: was the AOI shared with any detected region."""
    hits = []
    for aoi in snippet.aois:
        aoi_tokens = set(intersecting_tokens(records, aoi))
        hits.append(
            any(set(r.token_indices) & aoi_tokens for r in regions)
        )
    return hits


def overlap_counts(corpus, regions_by_snippet, records_by_snippet) -> dict:
    """UpSet-style intersection tallies per variant."""
    out = {}
    for variant in ("clean", "confusing"):
        n_regions = n_overlap = n_novel = n_aois = n_hit = 0
        for snippet in corpus.variant(variant):
            regions = regions_by_snippet.get(snippet.id, [])
            records = records_by_snippet[snippet.id]
            n_regions += len(regions)
            for reg in regions:
                if overlaps_aoi(reg, snippet, records):
                    n_overlap += 1
                else:
                    n_novel += 1
            hits = aoi_hits(regions, snippet, records)
            n_aois += len(hits)
            n_hit += sum(hits)
        out[variant] = {
            "regions": n_regions,
            "regions_overlapping_aoi": n_overlap,
            "regions_novel": n_novel,
            "aois": n_aois,
            "aois_detected": n_hit,
            "aois_missed": n_aois - n_hit,
            "detection_rate": (n_hit / n_aois) if n_aois else None,
        }
    return out


def region_to_dict(region: Region, overlaps: Optional[bool] = None) -> dict:
    out = {
        "snippet_id": region.snippet_id,
        "start": region.span.start,
        "end": region.span.end,
        "peak_token": region.peak_index,
        "max_ppl": region.max_ppl,
        "avg_ppl": region.avg_ppl,
        "category": region.category,
        "label": region.label,
    }
    if overlaps is not None:
        out["overlaps_aoi"] = overlaps
    return out


def region_from_dict(obj: dict) -> tuple[Region, Optional[bool]]:
    region = Region(
        snippet_id=obj["snippet_id"],
        span=CharSpan(int(obj["start"]), int(obj["end"])),
        token_indices=tuple(),
        peak_index=int(obj["peak_token"]),
        max_ppl=float(obj["max_ppl"]),
        avg_ppl=float(obj["avg_ppl"]),
        category=obj.get("category"),
        label=obj.get("label"),
    )
    return region, obj.get("overlaps_aoi")


def with_category(region: Region, category: str, label: str) -> Region:
    return replace(region, category=category, label=label)
