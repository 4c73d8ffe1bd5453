"""End-to-end orchestration shared by the library API and the CLI.

Running the CLI stages over intermediate files is equivalent to calling
these functions in-process on the same inputs.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

from . import peaks as peaks_mod
from . import perplexity as ppl_mod
from . import regions as regions_mod
from . import syntax as syntax_mod
from .backend import Backend
from .corpus import Corpus, Snippet
from .errors import ParseError

logger = logging.getLogger(__name__)


def compute_profiles(
    corpus: Corpus,
    backend: Backend,
    jobs: int = 1,
    include_first: bool = False,
    skip_whitespace: bool = False,
) -> dict[str, ppl_mod.PerplexityProfile]:
    """One profile per snippet; output keyed and ordered by snippet id."""

    def one(snippet: Snippet):
        records = backend.tokenize(snippet)
        return snippet.id, ppl_mod.build_profile(
            snippet.id,
            records,
            include_first=include_first,
            skip_whitespace=skip_whitespace,
        )

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(one, corpus.snippets))
    else:
        results = [one(s) for s in corpus.snippets]
    return dict(sorted(results))


def detect_snippet_regions(
    snippet: Snippet,
    profile: ppl_mod.PerplexityProfile,
    prominence: float = peaks_mod.DEFAULT_PROMINENCE,
    scale: str = peaks_mod.DEFAULT_SCALE,
    gap_tokens: int = regions_mod.DEFAULT_GAP_TOKENS,
    category_table: Optional[dict] = None,
) -> list[regions_mod.Region]:
    """Full detection pipeline for one snippet:
    peaks -> expansion -> merging -> categorization -> filtering."""
    if category_table is None:
        category_table = syntax_mod.load_category_map()
    records = list(profile.records)
    found = peaks_mod.find_profile_peaks(profile, prominence, scale)
    expanded = [
        regions_mod.expand(p, records, snippet.id, snippet.language) for p in found
    ]
    merged = regions_mod.merge(expanded, records, gap_tokens, snippet.language)
    categorized = syntax_mod.categorize_regions(merged, snippet.source, category_table)
    return syntax_mod.filter_regions(categorized)


def detect_regions(
    corpus: Corpus,
    profiles: dict[str, ppl_mod.PerplexityProfile],
    prominence: float = peaks_mod.DEFAULT_PROMINENCE,
    scale: str = peaks_mod.DEFAULT_SCALE,
    gap_tokens: int = regions_mod.DEFAULT_GAP_TOKENS,
    category_table: Optional[dict] = None,
    jobs: int = 1,
) -> tuple[dict[str, list], list[str]]:
    """Detect regions for every profiled snippet.

    Returns (regions by snippet id, ids of snippets that failed to
    parse). Parse failures are skipped with a warning.
    """
    if category_table is None:
        category_table = syntax_mod.load_category_map()

    def one(snippet: Snippet):
        profile = profiles[snippet.id]
        try:
            return snippet.id, detect_snippet_regions(
                snippet, profile, prominence, scale, gap_tokens, category_table
            ), None
        except ParseError as exc:
            logger.warning("snippet %s: %s", snippet.id, exc)
            return snippet.id, [], str(exc)

    snippets = [s for s in corpus.snippets if s.id in profiles]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(one, snippets))
    else:
        results = [one(s) for s in snippets]

    regions_by_snippet = {}
    failures = []
    for sid, regs, err in sorted(results, key=lambda r: r[0]):
        regions_by_snippet[sid] = regs
        if err is not None:
            failures.append(sid)
    return regions_by_snippet, failures
