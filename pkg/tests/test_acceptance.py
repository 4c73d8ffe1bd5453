"""End-to-end acceptance gate.

Each test covers one numbered criterion and prints a single
``[acceptance] criterion N ...: PASS`` line when it holds (run with
``pytest -s`` to see the lines as they pass). Tolerances appear inline
next to the assertions they bound.
"""

import itertools
import json
import math
import subprocess
import sys
import time
from collections import Counter

import numpy as np
import pytest
import scipy.stats as sps

from confusion_lens._kernels import local_maxima_prominences
from confusion_lens.peaks import Peak
from confusion_lens.perplexity import avg_perplexity, max_perplexity
from confusion_lens.regions import expand
from confusion_lens.stats import (
    PairedMetric,
    clustered_bootstrap_spearman,
    spearman,
    wilcoxon_signed_rank,
)

from conftest import make_records, records_for_source

CLI = [sys.executable, "-m", "confusion_lens.cli"]


def run_cli(*args, check=True):
    proc = subprocess.run(
        CLI + [str(a) for a in args], capture_output=True, text=True
    )
    if check:
        assert proc.returncode == 0, proc.stderr
    return proc


def read_jsonl(path):
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


def report(criterion, label):
    print(f"\n[acceptance] criterion {criterion} ({label}): PASS")


# --- criterion 1 -------------------------------------------------------------


def test_criterion_1_perplexity_exactness():
    """avg matches the product form (1/prod p)^(1/n) within 1e-12 relative
    error, max matches the exact maximum, on 1000 random sequences."""
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    for _ in range(1000):
        n = int(rng.integers(1, 513))
        logprobs = -rng.uniform(0.0, 8.0, size=n)
        records = make_records(list(logprobs))
        product = np.longdouble(1.0)
        for lp in logprobs:
            product *= np.exp(np.longdouble(lp))
        expected_avg = float((np.longdouble(1.0) / product) ** (np.longdouble(1.0) / n))
        expected_max = float(np.exp(-logprobs.min()))
        assert avg_perplexity(records) == pytest.approx(expected_avg, rel=1e-12)
        assert max_perplexity(records) == pytest.approx(expected_max, rel=1e-12)
    elapsed = time.perf_counter() - t0
    assert elapsed < 5.0, f"took {elapsed:.2f}s"
    report(1, "perplexity exactness")


# --- criterion 2 -------------------------------------------------------------


def build_target_fixture(tmp_path):
    """Two-pair corpus + recorded-logprob fixture. The demo pair realizes
    AOI avg 1 -> 9, AOI max 1 -> 555, snippet avg 20 -> 26, snippet max
    2661 on both variants; the pad pair exists only so every paired
    metric has a nonzero difference."""
    n = 21  # token 0 unscored + 20 scored single-character tokens
    aoi = (5, 9)  # scored tokens 5..8
    max_pos = 15

    def logprobs(aoi_lps, snippet_avg):
        lps = [None] * n
        for pos, lp in zip(range(aoi[0], aoi[1]), aoi_lps):
            lps[pos] = lp
        lps[max_pos] = -math.log(2661.0)
        filler = [i for i in range(1, n) if lps[i] is None]
        total = 20 * math.log(snippet_avg)
        spent = sum(-lps[i] for i in range(1, n) if lps[i] is not None)
        for i in filler:
            lps[i] = -(total - spent) / len(filler)
        return lps

    clean_lps = logprobs([0.0] * 4, snippet_avg=20.0)
    conf_aoi = [-math.log(555.0)] + [-(4 * math.log(9.0) - math.log(555.0)) / 3] * 3
    confusing_lps = logprobs(conf_aoi, snippet_avg=26.0)

    source = "q" + "abcdefghijklmnopqrst"
    corpus_rows = [
        {"id": "demo_clean", "pair_id": "demo", "variant": "clean",
         "language": "java", "source": source,
         "aois": [{"start": aoi[0], "end": aoi[1]}]},
        {"id": "demo_confusing", "pair_id": "demo", "variant": "confusing",
         "language": "java", "source": source,
         "aois": [{"start": aoi[0], "end": aoi[1]}]},
        {"id": "pad_clean", "pair_id": "pad", "variant": "clean",
         "language": "java", "source": source,
         "aois": [{"start": aoi[0], "end": aoi[1]}]},
        {"id": "pad_confusing", "pair_id": "pad", "variant": "confusing",
         "language": "java", "source": source,
         "aois": [{"start": aoi[0], "end": aoi[1]}]},
    ]
    corpus_path = tmp_path / "target_corpus.jsonl"
    with open(corpus_path, "w") as fh:
        for row in corpus_rows:
            fh.write(json.dumps(row) + "\n")

    def token_rows(lps):
        return [
            {"index": i, "text": source[i], "start": i, "end": i + 1,
             "logprob": lp}
            for i, lp in enumerate(lps)
        ]

    fixture_path = tmp_path / "target_fixture.jsonl"
    with open(fixture_path, "w") as fh:
        for sid, lps in (
            ("demo_clean", clean_lps),
            ("demo_confusing", confusing_lps),
            ("pad_clean", [None] + [-1.0] * 20),
            ("pad_confusing", [None] + [-2.0] * 20),
        ):
            fh.write(json.dumps({"snippet_id": sid, "tokens": token_rows(lps)}) + "\n")
    return corpus_path, fixture_path


def test_criterion_2_constructed_fixture_targets(tmp_path):
    corpus_path, fixture_path = build_target_fixture(tmp_path)
    profiles = tmp_path / "profiles.jsonl"
    run_cli("ppl", "--corpus", corpus_path, "--backend", f"file:{fixture_path}",
            "--out", profiles)
    compare = tmp_path / "compare.json"
    run_cli("compare", "--profiles", profiles, "--corpus", corpus_path,
            "--all", "--out", compare)
    result = json.loads(compare.read_text())

    targets = {
        "snippet_avg": (20.0, 26.0),
        "snippet_max": (2661.0, 2661.0),
        "aoi_avg": (1.0, 9.0),
        "aoi_max": (1.0, 555.0),
    }
    for block_name, (clean_t, confusing_t) in targets.items():
        pair = next(
            p for p in result[block_name]["pairs"] if p["pair_id"] == "demo"
        )
        assert pair["clean"] == pytest.approx(clean_t, rel=1e-9), block_name
        assert pair["confusing"] == pytest.approx(confusing_t, rel=1e-9), block_name

    # bit stability of the whole run
    profiles2 = tmp_path / "profiles2.jsonl"
    run_cli("ppl", "--corpus", corpus_path, "--backend", f"file:{fixture_path}",
            "--out", profiles2)
    compare2 = tmp_path / "compare2.json"
    run_cli("compare", "--profiles", profiles2, "--corpus", corpus_path,
            "--all", "--out", compare2)
    assert profiles2.read_bytes() == profiles.read_bytes()
    assert compare2.read_bytes() == compare.read_bytes()
    report(2, "constructed fixture hits the target metrics, bit-stable")


# --- criterion 3 -------------------------------------------------------------


def oracle_prominences(signal):
    signal = list(signal)
    n = len(signal)
    peaks, proms = [], []
    i = 1
    while i < n - 1:
        if signal[i] > signal[i - 1]:
            j = i
            while j + 1 < n and signal[j + 1] == signal[i]:
                j += 1
            if j < n - 1 and signal[j + 1] < signal[i]:
                left = signal[i]
                k = i - 1
                while k >= 0 and signal[k] <= signal[i]:
                    left = min(left, signal[k])
                    k -= 1
                right = signal[i]
                k = j + 1
                while k < n and signal[k] <= signal[i]:
                    right = min(right, signal[k])
                    k += 1
                peaks.append(i)
                proms.append(signal[i] - max(left, right))
            i = j + 1
        else:
            i += 1
    return peaks, proms


def test_criterion_3_peak_oracle():
    rng = np.random.default_rng(303)
    t0 = time.perf_counter()
    for trial in range(1000):
        n = int(rng.integers(1, 65))
        if trial % 2 == 0:
            signal = list(rng.integers(0, 5, size=n).astype(float))  # plateaus
        else:
            signal = list(rng.uniform(0, 10, size=n))
        got_idx, got_prom = local_maxima_prominences(signal)
        exp_idx, exp_prom = oracle_prominences(signal)
        assert list(got_idx) == exp_idx
        assert list(got_prom) == exp_prom  # exact
    elapsed = time.perf_counter() - t0
    assert elapsed < 10.0, f"took {elapsed:.2f}s"
    report(3, "prominence peak oracle, exact")


# --- criterion 4 -------------------------------------------------------------


def test_criterion_4_wilcoxon_oracle():
    # exact path: every sign pattern for untied magnitudes, n = 3..10
    for n in range(3, 11):
        ranks = np.arange(1.0, n + 1)
        total = ranks.sum()
        dist = Counter()
        for mask in range(1 << n):
            dist[sum(ranks[i] for i in range(n) if mask & (1 << i))] += 1
        for mask in range(1 << n):
            diffs = [
                ranks[i] if mask & (1 << i) else -ranks[i] for i in range(n)
            ]
            res = wilcoxon_signed_rank(
                [PairedMetric(f"p{i}", 0.0, d) for i, d in enumerate(diffs)]
            )
            assert res.method == "exact"
            w_plus = sum(r for r in diffs if r > 0)
            assert res.w_statistic == min(w_plus, total - w_plus)
            w_min = res.w_statistic
            count = sum(
                c for w, c in dist.items()
                if w <= w_min or w >= total - w_min
            )
            assert res.p_value == min(1.0, count / (1 << n))

    # decision agreement with the reference implementation at alpha = 0.05
    rng = np.random.default_rng(404)
    agree = trials = 0
    while trials < 1000:
        n = int(rng.integers(6, 40))
        diffs = np.round(
            rng.normal(loc=rng.uniform(-1, 1), scale=1.0, size=n), 1
        )
        diffs = diffs[diffs != 0]
        if len(diffs) < 6 or len(set(np.abs(diffs))) == 1:
            continue
        trials += 1
        res = wilcoxon_signed_rank(
            [PairedMetric(f"p{i}", 0.0, d) for i, d in enumerate(diffs)]
        )
        ref = sps.wilcoxon(diffs, correction=False)
        if (res.p_value < 0.05) == (ref.pvalue < 0.05):
            agree += 1
    assert agree >= 950, f"decision agreement {agree}/1000"
    report(4, "Wilcoxon enumeration oracle and decision agreement")


# --- criterion 5 -------------------------------------------------------------


def test_criterion_5_spearman_oracle():
    rng = np.random.default_rng(505)
    for _ in range(1000):
        n = int(rng.integers(3, 80))
        x = rng.integers(0, 8, size=n).astype(float)  # heavy ties
        y = rng.integers(0, 8, size=n).astype(float)
        rx, ry = sps.rankdata(x), sps.rankdata(y)
        if rx.std() == 0 or ry.std() == 0:
            continue
        expected = float(np.corrcoef(rx, ry)[0, 1])
        got = spearman(x, y).rho if abs(expected) < 1 else None
        if got is not None:
            assert got == pytest.approx(expected, abs=1e-12)

    xs = np.sort(rng.uniform(0, 1, size=25))
    assert spearman(xs, np.exp(xs)).rho == 1.0
    assert spearman(xs, -(xs**3)).rho == -1.0
    report(5, "Spearman mid-rank Pearson oracle, exact +/-1 on monotone data")


# --- criterion 6 -------------------------------------------------------------


def planted_clusters(n_clusters, per_cluster, noise, seed):
    rng = np.random.default_rng(seed)
    points = []
    for c in range(n_clusters):
        base = rng.uniform(0, 10)
        for _ in range(per_cluster):
            x = base + rng.uniform(0, 1)
            points.append((f"c{c}", x, x + rng.normal(scale=noise)))
    return points


def test_criterion_6_bootstrap_determinism_and_sanity():
    points = planted_clusters(30, 4, 1.0, seed=60)
    a = clustered_bootstrap_spearman(points, replicates=500, seed=9)
    b = clustered_bootstrap_spearman(list(reversed(points)), replicates=500, seed=9)
    assert (a.rho, a.ci_low, a.ci_high) == (b.rho, b.ci_low, b.ci_high)

    hits = 0
    for seed in range(20):
        pts = planted_clusters(30, 4, 2.0, seed=seed)
        res = clustered_bootstrap_spearman(pts, replicates=500, seed=seed)
        if res.ci_low - 1e-12 <= res.rho <= res.ci_high + 1e-12:
            hits += 1
    assert hits >= 18, f"CI covered full-sample rho in only {hits}/20 runs"

    big = planted_clusters(100, 5, 1.0, seed=600)  # 500 points
    t0 = time.perf_counter()
    clustered_bootstrap_spearman(big, replicates=10_000, seed=1)
    elapsed = time.perf_counter() - t0
    assert elapsed < 30.0, f"10k replicates took {elapsed:.2f}s"
    report(6, "bootstrap determinism, CI coverage, runtime")


# --- criterion 7 -------------------------------------------------------------


def build_recall_corpus(path, n_pairs=50):
    """Confusing variants put operators inside the AOI that never occur in
    any clean variant, so the reference model (trained on clean) assigns
    them very low probability."""
    rare = "&|^%~"
    rows = []
    for i in range(n_pairs):
        op = rare[i % len(rare)]
        clean_expr = f"a{i} + b{i}"
        confusing_expr = f"a{i} {op} b{i}"
        prefix = f"int v{i} = "
        # a common trailing statement lets the surprisal signal return to
        # baseline after the AOI, so the injected spike is a proper peak
        suffix = f";\nint w{i} = a{i} + b{i};"
        for variant, expr in (("clean", clean_expr), ("confusing", confusing_expr)):
            source = f"{prefix}{expr}{suffix}"
            rows.append({
                "id": f"r{i}_{variant}", "pair_id": f"r{i}", "variant": variant,
                "language": "java", "source": source,
                "aois": [{"start": len(prefix), "end": len(prefix) + len(expr)}],
            })
    with open(path, "w") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")
    return path


def test_criterion_7_detection_recall(tmp_path):
    corpus = build_recall_corpus(tmp_path / "recall_corpus.jsonl")
    profiles = tmp_path / "profiles.jsonl"
    run_cli("ppl", "--corpus", corpus, "--backend", "reference",
            "--out", profiles)
    regions = tmp_path / "regions.jsonl"
    run_cli("detect", "--profiles", profiles, "--corpus", corpus,
            "--out", regions)
    overlap = tmp_path / "overlap.json"
    run_cli("overlap", "--regions", regions, "--corpus", corpus,
            "--out", overlap)

    rows = read_jsonl(regions)
    assert rows
    retained = {"Literal", "ProgramStructure", "Expression", "Operator"}
    leakage = [r for r in rows if r["category"] not in retained]
    assert len(leakage) <= 0.10 * len(rows), leakage

    result = json.loads(overlap.read_text())
    rate = result["confusing"]["detection_rate"]
    assert rate >= 0.90, f"detected {rate:.0%} of injected AOIs"
    report(7, f"recall {rate:.0%} of injected AOIs, no category leakage")


# --- criterion 8 -------------------------------------------------------------


def test_criterion_8_filter_compliance_and_hand_traces(tmp_path):
    from importlib import resources

    corpus = str(resources.files("confusion_lens.data").joinpath("atoms_mini.jsonl"))
    profiles = tmp_path / "profiles.jsonl"
    run_cli("ppl", "--corpus", corpus, "--backend", "reference", "--out", profiles)
    regions = tmp_path / "regions.jsonl"
    run_cli("detect", "--profiles", profiles, "--corpus", corpus, "--out", regions)
    retained = {"Literal", "ProgramStructure", "Expression", "Operator"}
    rows = read_jsonl(regions)
    assert rows
    for row in rows:
        assert row["category"] in retained, row

    # hand-traced expansions on bundled snippet sources
    def expand_text(source, pos):
        records = records_for_source(
            source, [None] + [-1.0] * (len(source) - 1)
        )
        region = expand(Peak(pos, 1.0, 1.0), records, snippet_id="s")
        return region.text(records)

    source = "int R = 12 & 3;"
    assert expand_text(source, source.index("&")) == "12 & 3"
    source = "while (V1 > 0)\n   V1--;\nR++;"
    pos = source.index("V1--") + 2  # first '-' of the update operator
    assert expand_text(source, pos) == "V1--"
    report(8, "retained-category filter and hand-traced expansions")


# --- criterion 9 -------------------------------------------------------------


def test_criterion_9_determinism_golden(tmp_path):
    from importlib import resources

    corpus = str(resources.files("confusion_lens.data").joinpath("atoms_mini.jsonl"))

    def full_run(tag, jobs):
        d = tmp_path / tag
        d.mkdir()
        profiles = d / "profiles.jsonl"
        regions = d / "regions.jsonl"
        compare = d / "compare.json"
        overlap = d / "overlap.json"
        run_cli("ppl", "--corpus", corpus, "--backend", "reference",
                "--out", profiles, "--jobs", jobs)
        run_cli("detect", "--profiles", profiles, "--corpus", corpus,
                "--out", regions, "--jobs", jobs)
        run_cli("compare", "--profiles", profiles, "--corpus", corpus,
                "--all", "--out", compare)
        run_cli("overlap", "--regions", regions, "--corpus", corpus,
                "--out", overlap)
        return [p.read_bytes() for p in (profiles, regions, compare, overlap)]

    first = full_run("run1", jobs=1)
    second = full_run("run2", jobs=1)
    parallel = full_run("run3", jobs=8)
    assert first == second
    assert first == parallel
    report(9, "byte-identical golden outputs across runs and --jobs 1 vs 8")
