import itertools
import math

import numpy as np
import pytest
import scipy.stats as sps

from confusion_lens._kernels import midrank, spearman_rho
from confusion_lens._kernels._pykernels import midrank as py_midrank
from confusion_lens._kernels._pykernels import spearman_rho as py_spearman_rho
from confusion_lens.errors import StatsError
from confusion_lens.stats import (
    PairedMetric,
    clustered_bootstrap_spearman,
    spearman,
    wilcoxon_signed_rank,
)


def pairs_from_diffs(diffs):
    return [
        PairedMetric(pair_id=f"p{i}", clean_value=0.0, confusing_value=float(d))
        for i, d in enumerate(diffs)
    ]


def exact_p_oracle(diffs):
    """Independent enumeration of the two-sided exact p-value: the
    probability, over all sign assignments, that W+ lands at least as far
    into either tail as observed."""
    abs_d = np.abs(np.asarray(diffs, dtype=float))
    ranks = sps.rankdata(abs_d)
    observed = sum(r for d, r in zip(diffs, ranks) if d > 0)
    total = ranks.sum()
    w_min = min(observed, total - observed)
    count = 0
    n = len(diffs)
    for signs in itertools.product((0, 1), repeat=n):
        w_plus = sum(r for s, r in zip(signs, ranks) if s)
        if w_plus <= w_min or w_plus >= total - w_min:
            count += 1
    return min(1.0, count / 2**n)


# --- midrank kernel -----------------------------------------------------------


def test_midrank_matches_scipy_rankdata():
    rng = np.random.default_rng(5)
    for _ in range(300):
        n = int(rng.integers(1, 60))
        values = rng.integers(0, 10, size=n).astype(float)
        assert np.allclose(midrank(values), sps.rankdata(values))
        assert np.allclose(py_midrank(values), sps.rankdata(values))


# --- Wilcoxon -----------------------------------------------------------------


def test_wilcoxon_small_exact_example():
    # d = [1, 2, 3]: W- = 0, exact two-sided p = 2/8
    res = wilcoxon_signed_rank(pairs_from_diffs([1.0, 2.0, 3.0]))
    assert res.method == "exact"
    assert res.w_statistic == 0.0
    assert res.w_plus == 6.0 and res.w_minus == 0.0
    assert res.p_value == pytest.approx(0.25)


def test_wilcoxon_tied_pair_symmetric():
    # d = [5, -5]: mid-ranks 1.5 each, W = 1.5, z = 0
    res = wilcoxon_signed_rank(pairs_from_diffs([5.0, -5.0]))
    assert res.w_statistic == pytest.approx(1.5)
    assert res.z == pytest.approx(0.0)
    assert res.method == "normal"
    assert res.p_value == pytest.approx(1.0)


def test_wilcoxon_zero_diffs_dropped_but_n_pairs_kept():
    res = wilcoxon_signed_rank(pairs_from_diffs([0.0, 0.0, 1.0, 2.0, 3.0, 4.0]))
    assert res.n_pairs == 6
    assert res.n_nonzero == 4
    assert res.effect_r == pytest.approx(res.z / math.sqrt(6))


def test_wilcoxon_all_zero_raises():
    with pytest.raises(StatsError):
        wilcoxon_signed_rank(pairs_from_diffs([0.0, 0.0]))
    with pytest.raises(StatsError):
        wilcoxon_signed_rank([])


def test_wilcoxon_exact_matches_enumeration_oracle():
    rng = np.random.default_rng(21)
    for _ in range(60):
        n = int(rng.integers(3, 11))
        # distinct magnitudes -> no ties, exact path
        mags = rng.permutation(np.arange(1, n + 1)).astype(float)
        signs = rng.choice([-1.0, 1.0], size=n)
        diffs = mags * signs
        res = wilcoxon_signed_rank(pairs_from_diffs(diffs))
        assert res.method == "exact"
        assert res.p_value == pytest.approx(exact_p_oracle(diffs))


def test_wilcoxon_matches_scipy_statistic_and_decision():
    """W must equal the scipy statistic exactly; the accept/reject decision
    at alpha = 0.05 must agree on at least 95% of random datasets."""
    rng = np.random.default_rng(8)
    agree = 0
    trials = 200
    for _ in range(trials):
        n = int(rng.integers(8, 40))
        diffs = rng.normal(loc=rng.uniform(-0.8, 0.8), scale=1.0, size=n)
        diffs = np.round(diffs, 1)
        diffs = diffs[diffs != 0]
        if len(diffs) < 8:
            continue
        res = wilcoxon_signed_rank(pairs_from_diffs(diffs))
        ref = sps.wilcoxon(diffs, correction=False,
                           mode="approx" if res.method == "normal" else "exact")
        assert res.w_statistic == pytest.approx(ref.statistic)
        if (res.p_value < 0.05) == (ref.pvalue < 0.05):
            agree += 1
    assert agree >= 0.95 * trials


def test_wilcoxon_continuity_correction_shrinks_z():
    diffs = list(np.arange(1.0, 21.0))
    plain = wilcoxon_signed_rank(pairs_from_diffs(diffs))
    corrected = wilcoxon_signed_rank(
        pairs_from_diffs(diffs), continuity_correction=True
    )
    assert corrected.z < plain.z
    assert corrected.p_value > plain.p_value


# --- Spearman -----------------------------------------------------------------


def test_spearman_perfect_monotone():
    res = spearman([1, 2, 3, 4], [10, 20, 30, 400])
    assert res.rho == pytest.approx(1.0)
    assert res.p_value == 0.0
    res = spearman([1, 2, 3, 4], [4, 3, 2, 1])
    assert res.rho == pytest.approx(-1.0)
    assert res.p_value == 0.0


def test_spearman_matches_scipy():
    rng = np.random.default_rng(13)
    for _ in range(200):
        n = int(rng.integers(4, 50))
        x = rng.integers(0, 12, size=n).astype(float)  # ties likely
        y = x * rng.uniform(0.2, 2.0) + rng.normal(size=n)
        if len(set(x)) < 2 or len(set(y)) < 2:
            continue
        ref_rho = np.corrcoef(sps.rankdata(x), sps.rankdata(y))[0, 1]
        assert spearman_rho(x, y) == pytest.approx(ref_rho, abs=1e-12)
        assert py_spearman_rho(x, y) == pytest.approx(ref_rho, abs=1e-12)
        if abs(ref_rho) < 1.0:
            res = spearman(x, y)
            ref = sps.spearmanr(x, y)
            assert res.rho == pytest.approx(ref.statistic, abs=1e-12)
            assert res.p_value == pytest.approx(ref.pvalue, rel=1e-9)


def test_spearman_invariant_under_monotone_transform():
    rng = np.random.default_rng(2)
    x = rng.uniform(1, 10, size=30)
    y = rng.uniform(1, 10, size=30)
    base = spearman(x, y).rho
    assert spearman(np.exp(x), y).rho == pytest.approx(base, abs=1e-12)
    assert spearman(x, y**3).rho == pytest.approx(base, abs=1e-12)


def test_spearman_degenerate_inputs():
    with pytest.raises(StatsError):
        spearman([1, 2], [1, 2])
    with pytest.raises(StatsError):
        spearman([1, 1, 1], [1, 2, 3])
    with pytest.raises(StatsError):
        spearman([1, 2, 3], [1, 2])


# --- clustered bootstrap -------------------------------------------------------


def planted_points(n_clusters=25, per_cluster=4, noise=0.5, seed=99):
    rng = np.random.default_rng(seed)
    points = []
    for c in range(n_clusters):
        base = rng.uniform(0, 10)
        for _ in range(per_cluster):
            x = base + rng.uniform(0, 1)
            y = x + rng.normal(scale=noise)
            points.append((f"c{c}", x, y))
    return points


def test_bootstrap_deterministic_for_seed():
    points = planted_points()
    a = clustered_bootstrap_spearman(points, replicates=200, seed=7)
    b = clustered_bootstrap_spearman(points, replicates=200, seed=7)
    assert (a.ci_low, a.ci_high, a.rho) == (b.ci_low, b.ci_high, b.rho)
    c = clustered_bootstrap_spearman(points, replicates=200, seed=8)
    assert (a.ci_low, a.ci_high) != (c.ci_low, c.ci_high)


def test_bootstrap_order_independent():
    points = planted_points()
    a = clustered_bootstrap_spearman(points, replicates=100, seed=3)
    b = clustered_bootstrap_spearman(list(reversed(points)), replicates=100, seed=3)
    assert (a.ci_low, a.ci_high, a.rho) == (b.ci_low, b.ci_high, b.rho)


def test_bootstrap_ci_brackets_point_estimate():
    points = planted_points()
    res = clustered_bootstrap_spearman(points, replicates=500, seed=1)
    assert res.ci_low <= res.rho <= res.ci_high
    assert res.replicates_used >= 0.95 * 500


def test_bootstrap_degenerate_perfect_correlation():
    points = [(f"c{i}", float(i), float(i)) for i in range(10)]
    res = clustered_bootstrap_spearman(points, replicates=100, seed=0)
    assert res.ci_low == pytest.approx(1.0)
    assert res.ci_high == pytest.approx(1.0)


def test_bootstrap_too_many_invalid_replicates():
    # constant y inside every cluster and identical across clusters: every
    # replicate has constant ranks -> rho undefined
    points = [("a", 1.0, 5.0), ("a", 2.0, 5.0), ("b", 3.0, 5.0), ("b", 4.0, 5.0)]
    with pytest.raises(StatsError):
        clustered_bootstrap_spearman(points, replicates=50, seed=0)


def test_bootstrap_requires_two_clusters():
    points = [("a", 1.0, 1.0), ("a", 2.0, 2.0), ("a", 3.0, 3.0)]
    with pytest.raises(StatsError):
        clustered_bootstrap_spearman(points, replicates=10, seed=0)


def test_bootstrap_coverage_of_full_sample_rho():
    """Across independent datasets, the 95% CI should contain the
    full-sample rho in nearly all runs (it is the resampling target)."""
    hits = 0
    runs = 20
    for seed in range(runs):
        points = planted_points(n_clusters=30, noise=2.0, seed=seed)
        res = clustered_bootstrap_spearman(points, replicates=300, seed=seed)
        if res.ci_low - 1e-12 <= res.rho <= res.ci_high + 1e-12:
            hits += 1
    assert hits >= runs - 2
