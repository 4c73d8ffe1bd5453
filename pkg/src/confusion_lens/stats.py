"""Nonparametric statistics: Wilcoxon signed-rank, Spearman rank
correlation, and snippet-clustered bootstrap confidence intervals.

The Wilcoxon test drops zero differences, mid-ranks ties, and reports
W = min(W+, W-) together with both components. For small untied samples
(n <= 12) the two-sided p-value is exact by enumerating all 2^n sign
patterns; otherwise the normal approximation with tie correction is
used. The rank-based effect size is r = Z / sqrt(N) with N the number
of paired observations before zero-dropping.

The clustered bootstrap resamples whole clusters (snippets) with
replacement; each replicate draws from an RNG stream derived from
(seed, replicate index), so results are bit-identical regardless of
execution order or parallelism.
"""

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import stats as sps

from ._kernels import midrank, spearman_rho
from .errors import StatsError

EXACT_MAX_N = 12
DEFAULT_REPLICATES = 10_000
MIN_VALID_FRACTION = 0.95


@dataclass(frozen=True)
class PairedMetric:
    pair_id: str
    clean_value: float
    confusing_value: float


@dataclass(frozen=True)
class WilcoxonResult:
    w_statistic: float
    w_plus: float
    w_minus: float
    z: float
    p_value: float
    effect_r: float
    n_pairs: int
    n_nonzero: int
    method: str  # "exact" | "normal"


@dataclass(frozen=True)
class CorrelationResult:
    rho: float
    p_value: float
    n: int
    ci_low: Optional[float] = None
    ci_high: Optional[float] = None
    replicates_used: int = 0
    seed: Optional[int] = None


def _normal_sf(z: float) -> float:
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def _exact_two_sided_p(ranks: np.ndarray, w_min: float) -> float:
    """Enumerate all sign patterns; two-sided tail of W+ by symmetry."""
    n = len(ranks)
    total = ranks.sum()
    count = 0
    for mask in range(1 << n):
        w_plus = 0.0
        for i in range(n):
            if mask & (1 << i):
                w_plus += ranks[i]
        if w_plus <= w_min or w_plus >= total - w_min:
            count += 1
    return min(1.0, count / (1 << n))


def wilcoxon_signed_rank(
    pairs: Sequence[PairedMetric],
    continuity_correction: bool = False,
) -> WilcoxonResult:
    n_pairs = len(pairs)
    if n_pairs == 0:
        raise StatsError("no pairs")
    diffs = np.array([p.confusing_value - p.clean_value for p in pairs], dtype=float)
    if not np.all(np.isfinite(diffs)):
        raise StatsError("non-finite difference")
    nonzero = diffs[diffs != 0.0]
    n = len(nonzero)
    if n == 0:
        raise StatsError("all differences zero")

    abs_d = np.abs(nonzero)
    ranks = midrank(abs_d)
    w_plus = float(ranks[nonzero > 0].sum())
    w_minus = float(ranks[nonzero < 0].sum())
    w = min(w_plus, w_minus)

    # tie correction: sum(t^3 - t) over groups of tied |d|
    _, tie_counts = np.unique(abs_d, return_counts=True)
    tie_term = float(((tie_counts**3 - tie_counts).sum()) / 48.0)
    mean_w = n * (n + 1) / 4.0
    var_w = n * (n + 1) * (2 * n + 1) / 24.0 - tie_term
    if var_w <= 0:
        raise StatsError("degenerate variance (all differences tied at one value)")
    numer = abs(w - mean_w)
    if continuity_correction:
        numer = max(0.0, numer - 0.5)
    z = numer / math.sqrt(var_w)
    p_normal = min(1.0, 2.0 * _normal_sf(z))

    has_ties = bool(np.any(tie_counts > 1))
    if n <= EXACT_MAX_N and not has_ties:
        p = _exact_two_sided_p(ranks, w)
        method = "exact"
    else:
        p = p_normal
        method = "normal"

    return WilcoxonResult(
        w_statistic=w,
        w_plus=w_plus,
        w_minus=w_minus,
        z=z,
        p_value=p,
        effect_r=z / math.sqrt(n_pairs),
        n_pairs=n_pairs,
        n_nonzero=n,
        method=method,
    )


def spearman(xs: Sequence[float], ys: Sequence[float]) -> CorrelationResult:
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape:
        raise StatsError("xs and ys must have equal length")
    n = len(x)
    if n < 3:
        raise StatsError("need at least 3 points")
    rho = spearman_rho(x, y)
    if math.isnan(rho):
        raise StatsError("rho undefined for constant input")
    if abs(rho) >= 1.0:
        p = 0.0
    else:
        t = rho * math.sqrt((n - 2) / (1.0 - rho * rho))
        p = float(2.0 * sps.t.sf(abs(t), df=n - 2))
    return CorrelationResult(rho=float(rho), p_value=p, n=n)


def _replicate_rng(seed: int, replicate: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, replicate])))


def clustered_bootstrap_spearman(
    points: Sequence[tuple],
    replicates: int = DEFAULT_REPLICATES,
    seed: int = 0,
) -> CorrelationResult:
    """Percentile CI for Spearman rho, resampling clusters with
    replacement.

    ``points`` are (cluster_id, x, y) triples. Replicates with undefined
    rho (fewer than 3 points or constant ranks) are discarded; more than
    5% invalid replicates is an error.
    """
    if replicates < 1:
        raise StatsError("replicates must be >= 1")
    clusters: dict = {}
    for cid, x, y in points:
        clusters.setdefault(cid, ([], []))
        clusters[cid][0].append(float(x))
        clusters[cid][1].append(float(y))
    if len(clusters) < 2:
        raise StatsError("need at least 2 distinct clusters")

    cluster_ids = sorted(clusters, key=str)
    xs_by_cluster = [np.asarray(clusters[c][0]) for c in cluster_ids]
    ys_by_cluster = [np.asarray(clusters[c][1]) for c in cluster_ids]
    m = len(cluster_ids)

    full = spearman(
        np.concatenate(xs_by_cluster), np.concatenate(ys_by_cluster)
    )

    rhos = np.empty(replicates, dtype=float)
    valid = 0
    for rep in range(replicates):
        rng = _replicate_rng(seed, rep)
        draw = rng.integers(0, m, size=m)
        x = np.concatenate([xs_by_cluster[j] for j in draw])
        if len(x) < 3:
            continue
        y = np.concatenate([ys_by_cluster[j] for j in draw])
        rho = spearman_rho(x, y)
        if math.isnan(rho):
            continue
        rhos[valid] = rho
        valid += 1

    if valid < MIN_VALID_FRACTION * replicates:
        raise StatsError(
            f"only {valid}/{replicates} bootstrap replicates were valid"
        )
    ci_low, ci_high = np.percentile(rhos[:valid], [2.5, 97.5])
    return CorrelationResult(
        rho=full.rho,
        p_value=full.p_value,
        n=full.n,
        ci_low=float(ci_low),
        ci_high=float(ci_high),
        replicates_used=valid,
        seed=seed,
    )


def wilcoxon_to_dict(result: WilcoxonResult) -> dict:
    return {
        "test": "wilcoxon_signed_rank",
        "statistic": result.w_statistic,
        "w_plus": result.w_plus,
        "w_minus": result.w_minus,
        "z": result.z,
        "p": result.p_value,
        "effect_r": result.effect_r,
        "n": result.n_pairs,
        "n_nonzero": result.n_nonzero,
        "method": result.method,
    }


def correlation_to_dict(result: CorrelationResult) -> dict:
    out = {
        "test": "spearman",
        "statistic": result.rho,
        "p": result.p_value,
        "n": result.n,
    }
    if result.ci_low is not None:
        out["ci"] = [result.ci_low, result.ci_high]
        out["replicates"] = result.replicates_used
        out["seed"] = result.seed
    return out
