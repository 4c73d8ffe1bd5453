"""Confusion Lens: locate cognitively confusing code regions from
language-model token perplexity.

Pipeline: per-token logprobs (HTTP endpoint, recorded fixture, or the
built-in reference n-gram) -> perplexity profiles -> prominence peak
detection -> lexical/syntactic region expansion and merging -> AST
categorization and filtering -> nonparametric statistics against paired
variants and external per-region measurements.
"""

from ._kernels import KERNEL_IMPLEMENTATION
from .backend import Backend, BackendConfig, TokenRecord, align_tokens, make_backend
from .corpus import CharSpan, Corpus, Snippet, load_corpus
from .peaks import Peak, detection_signal, find_peaks
from .perplexity import (
    PerplexityProfile,
    avg_perplexity,
    build_profile,
    intersecting_tokens,
    max_perplexity,
    token_perplexities,
)
from .pipeline import compute_profiles, detect_regions, detect_snippet_regions
from .regions import Region, classify, expand, merge, overlap_counts, overlaps_aoi
from .stats import (
    CorrelationResult,
    PairedMetric,
    WilcoxonResult,
    clustered_bootstrap_spearman,
    spearman,
    wilcoxon_signed_rank,
)
from .syntax import categorize, covering_node, filter_regions, load_category_map

__version__ = "0.1.0"

__all__ = [
    "Backend",
    "BackendConfig",
    "CharSpan",
    "Corpus",
    "CorrelationResult",
    "KERNEL_IMPLEMENTATION",
    "PairedMetric",
    "Peak",
    "PerplexityProfile",
    "Region",
    "Snippet",
    "TokenRecord",
    "WilcoxonResult",
    "align_tokens",
    "avg_perplexity",
    "build_profile",
    "categorize",
    "classify",
    "clustered_bootstrap_spearman",
    "compute_profiles",
    "covering_node",
    "detect_regions",
    "detect_snippet_regions",
    "detection_signal",
    "expand",
    "filter_regions",
    "find_peaks",
    "intersecting_tokens",
    "load_category_map",
    "load_corpus",
    "make_backend",
    "max_perplexity",
    "merge",
    "overlap_counts",
    "overlaps_aoi",
    "spearman",
    "token_perplexities",
    "wilcoxon_signed_rank",
]
