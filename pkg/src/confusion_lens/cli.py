"""Command-line pipeline: ppl -> detect -> compare/correlate/overlap.

Outputs are canonical JSON/JSONL (sorted keys, 12 significant digits)
so identical inputs and flags produce byte-identical files. Exit codes:
0 success, 1 usage error, 2 data error, 3 backend error.
"""

import csv
import math
import sys

import click

from . import peaks as peaks_mod
from . import perplexity as ppl_mod
from . import regions as regions_mod
from . import report as report_mod
from . import stats as stats_mod
from . import syntax as syntax_mod
from ._io import read_jsonl, write_json, write_jsonl
from .backend import BackendConfig, make_backend
from .corpus import Corpus, load_corpus
from .errors import BackendError, ConfusionLensError, DataError
from .pipeline import compute_profiles, detect_regions

EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_BACKEND = 3


@click.group()
def cli():
    """Detect confusing code regions from language-model perplexity."""


def _load_profiles(path, corpus: Corpus) -> dict:
    profiles = {}
    for lineno, obj in read_jsonl(path):
        sid = obj.get("snippet_id")
        if sid not in corpus.by_id:
            raise DataError(f"{path}:{lineno}: unknown snippet id {sid!r}")
        profiles[sid] = ppl_mod.profile_from_dict(obj, corpus.by_id[sid].source)
    if not profiles:
        raise DataError(f"{path}: no profiles")
    return profiles


@cli.command("ppl")
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--backend", "backend_spec", required=True,
              help="http:URL | file:PATH | reference")
@click.option("--model", default="default", show_default=True)
@click.option("--cache", "cache_path", default=None, type=click.Path())
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--jobs", default=1, show_default=True)
@click.option("--include-first", is_flag=True,
              help="include the first token when the backend scores it")
@click.option("--skip-whitespace", is_flag=True,
              help="exclude whitespace-only tokens from aggregates")
@click.option("--train-on", type=click.Choice(["clean", "all"]), default="clean",
              show_default=True, help="training split for the reference model")
def cmd_ppl(corpus_path, backend_spec, model, cache_path, out_path, jobs,
            include_first, skip_whitespace, train_on):
    """Compute per-token perplexity profiles for every snippet."""
    corpus = load_corpus(corpus_path)
    config = BackendConfig.from_spec(backend_spec, model=model, train_on=train_on)
    backend = make_backend(config, corpus=corpus, cache_path=cache_path)
    profiles = compute_profiles(
        corpus, backend, jobs=jobs,
        include_first=include_first, skip_whitespace=skip_whitespace,
    )
    write_jsonl(out_path, (ppl_mod.profile_to_dict(p) for p in profiles.values()))
    click.echo(f"wrote {len(profiles)} profiles to {out_path}", err=True)


@cli.command("detect")
@click.option("--profiles", "profiles_path", required=True, type=click.Path(exists=True))
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--prominence", default=peaks_mod.DEFAULT_PROMINENCE, show_default=True)
@click.option("--scale", type=click.Choice(peaks_mod.SCALES),
              default=peaks_mod.DEFAULT_SCALE, show_default=True)
@click.option("--gap", default=regions_mod.DEFAULT_GAP_TOKENS, show_default=True,
              help="max non-whitespace tokens between merged regions")
@click.option("--mapping", "mapping_path", default=None, type=click.Path(exists=True),
              help="custom node-kind to category JSON map")
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--jobs", default=1, show_default=True)
@click.pass_context
def cmd_detect(ctx, profiles_path, corpus_path, prominence, scale, gap,
               mapping_path, out_path, jobs):
    """Detect, categorize, and filter regions of confusion."""
    corpus = load_corpus(corpus_path)
    profiles = _load_profiles(profiles_path, corpus)
    table = syntax_mod.load_category_map(mapping_path)
    regions_by_snippet, failures = detect_regions(
        corpus, profiles, prominence=prominence, scale=scale,
        gap_tokens=gap, category_table=table, jobs=jobs,
    )
    rows = []
    for sid in sorted(regions_by_snippet):
        snippet = corpus.by_id[sid]
        records = list(profiles[sid].records)
        for region in regions_by_snippet[sid]:
            rows.append(
                regions_mod.region_to_dict(
                    region,
                    overlaps=regions_mod.overlaps_aoi(region, snippet, records),
                )
            )
    write_jsonl(out_path, rows)
    click.echo(f"wrote {len(rows)} regions to {out_path}", err=True)
    if failures:
        click.echo(f"parse failures, skipped: {', '.join(failures)}", err=True)
        ctx.exit(EXIT_DATA)


def _aoi_union_metric(records, aois, metric: str):
    idx = set()
    for aoi in aois:
        idx.update(ppl_mod.intersecting_tokens(records, aoi))
    idx = [i for i in sorted(idx) if i > 0 and records[i].logprob is not None]
    if not idx:
        raise DataError("no scored tokens in any AOI")
    surprisals = [-records[i].logprob for i in idx]
    if metric == "avg":
        return math.exp(sum(surprisals) / len(surprisals))
    return math.exp(max(surprisals))


def _paired_metrics(corpus, profiles, level: str, metric: str):
    pairs = []
    for pid in sorted(corpus.pairs):
        clean, confusing = corpus.pairs[pid]
        values = {}
        for snippet in (clean, confusing):
            if snippet.id not in profiles:
                raise DataError(f"pair {pid}: missing profile for {snippet.id}")
            profile = profiles[snippet.id]
            if level == "snippet":
                values[snippet.variant] = (
                    profile.snippet_avg if metric == "avg" else profile.snippet_max
                )
            else:
                if not snippet.aois:
                    raise DataError(f"snippet {snippet.id}: no AOIs for aoi-level metric")
                values[snippet.variant] = _aoi_union_metric(
                    list(profile.records), snippet.aois, metric
                )
        pairs.append(
            stats_mod.PairedMetric(
                pair_id=pid,
                clean_value=values["clean"],
                confusing_value=values["confusing"],
            )
        )
    return pairs


def _compare_block(corpus, profiles, level, metric):
    pairs = _paired_metrics(corpus, profiles, level, metric)
    result = stats_mod.wilcoxon_signed_rank(pairs)
    block = stats_mod.wilcoxon_to_dict(result)
    block["level"] = level
    block["metric"] = metric
    block["pairs"] = [
        {"pair_id": p.pair_id, "clean": p.clean_value, "confusing": p.confusing_value}
        for p in pairs
    ]
    return block


@cli.command("compare")
@click.option("--profiles", "profiles_path", required=True, type=click.Path(exists=True))
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--level", type=click.Choice(["snippet", "aoi"]), default="snippet",
              show_default=True)
@click.option("--metric", type=click.Choice(["avg", "max"]), default="avg",
              show_default=True)
@click.option("--all", "run_all", is_flag=True,
              help="all four level x metric combinations")
@click.option("--out", "out_path", required=True, type=click.Path())
def cmd_compare(profiles_path, corpus_path, level, metric, run_all, out_path):
    """Wilcoxon signed-rank comparison of clean vs confusing variants."""
    corpus = load_corpus(corpus_path)
    profiles = _load_profiles(profiles_path, corpus)
    if run_all:
        out = {
            f"{lvl}_{met}": _compare_block(corpus, profiles, lvl, met)
            for lvl in ("snippet", "aoi")
            for met in ("avg", "max")
        }
    else:
        out = _compare_block(corpus, profiles, level, metric)
    write_json(out_path, out)


def _read_measurements(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or []
        if set(fields) == {"snippet_id", "start", "end", "value"}:
            mode = "span"
        elif set(fields) == {"snippet_id", "aoi_index", "value"}:
            mode = "aoi_index"
        else:
            raise DataError(
                f"{path}: header must be snippet_id,start,end,value or "
                f"snippet_id,aoi_index,value; got {fields}"
            )
        rows = list(reader)
    if not rows:
        raise DataError(f"{path}: no measurement rows")
    return mode, rows


def _resolve_measurement_span(corpus, mode, row, path, lineno):
    sid = row["snippet_id"]
    if sid not in corpus.by_id:
        raise DataError(f"{path}:{lineno}: unknown snippet id {sid!r}")
    snippet = corpus.by_id[sid]
    if mode == "span":
        from .corpus import CharSpan

        span = CharSpan(int(row["start"]), int(row["end"]))
        if span.end > len(snippet.source):
            raise DataError(f"{path}:{lineno}: span out of bounds for {sid}")
    else:
        span = snippet.aoi_of(int(row["aoi_index"]))
    return snippet, span, float(row["value"])


@cli.command("correlate")
@click.option("--regions", "regions_path", default=None, type=click.Path(exists=True),
              help="correlate detected regions (mutually exclusive with --aoi)")
@click.option("--aoi", "use_aoi", is_flag=True,
              help="correlate annotated AOIs (requires --profiles)")
@click.option("--profiles", "profiles_path", default=None, type=click.Path(exists=True))
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--measurements", "measurements_path", required=True,
              type=click.Path(exists=True))
@click.option("--clustered", is_flag=True, help="snippet-clustered bootstrap CI")
@click.option("--replicates", default=stats_mod.DEFAULT_REPLICATES, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
def cmd_correlate(regions_path, use_aoi, profiles_path, corpus_path,
                  measurements_path, clustered, replicates, seed, out_path):
    """Spearman correlation of perplexity against external measurements."""
    if bool(regions_path) == bool(use_aoi):
        raise click.UsageError("exactly one of --regions or --aoi is required")
    if use_aoi and not profiles_path:
        raise click.UsageError("--aoi requires --profiles")
    corpus = load_corpus(corpus_path)
    mode, rows = _read_measurements(measurements_path)

    regions_by_snippet = {}
    if regions_path:
        for lineno, obj in read_jsonl(regions_path):
            region, _ = regions_mod.region_from_dict(obj)
            regions_by_snippet.setdefault(region.snippet_id, []).append(region)
    profiles = _load_profiles(profiles_path, corpus) if use_aoi else None

    points = {"clean": [], "confusing": []}
    unresolved = []
    for lineno, row in enumerate(rows, start=2):
        snippet, span, value = _resolve_measurement_span(
            corpus, mode, row, measurements_path, lineno
        )
        matched = False
        if regions_path:
            for region in regions_by_snippet.get(snippet.id, []):
                if region.span.overlaps(span):
                    points[snippet.variant].append(
                        (snippet.id, region.max_ppl, value)
                    )
                    matched = True
        else:
            records = list(profiles[snippet.id].records)
            try:
                x = _aoi_union_metric(records, [span], "max")
            except DataError:
                x = None
            if x is not None:
                points[snippet.variant].append((snippet.id, x, value))
                matched = True
        if not matched:
            unresolved.append(lineno)

    out = {"unresolved_rows": unresolved}
    for variant, pts in points.items():
        if len(pts) < 3:
            out[variant] = {"error": f"too few points ({len(pts)})"}
            continue
        if clustered:
            result = stats_mod.clustered_bootstrap_spearman(
                pts, replicates=replicates, seed=seed
            )
        else:
            result = stats_mod.spearman(
                [p[1] for p in pts], [p[2] for p in pts]
            )
        out[variant] = stats_mod.correlation_to_dict(result)
        out[variant]["points"] = len(pts)
    write_json(out_path, out)


@cli.command("overlap")
@click.option("--regions", "regions_path", required=True, type=click.Path(exists=True))
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
def cmd_overlap(regions_path, corpus_path, out_path):
    """Intersection counts between detected regions and annotated AOIs."""
    corpus = load_corpus(corpus_path)
    regions_by_snippet = {}
    flags_by_snippet = {}
    for lineno, obj in read_jsonl(regions_path):
        region, flag = regions_mod.region_from_dict(obj)
        if region.snippet_id not in corpus.by_id:
            raise DataError(f"{regions_path}:{lineno}: unknown snippet id")
        regions_by_snippet.setdefault(region.snippet_id, []).append(region)
        flags_by_snippet.setdefault(region.snippet_id, []).append(flag)

    out = {}
    for variant in ("clean", "confusing"):
        n_regions = n_overlap = n_aois = n_hit = 0
        for snippet in corpus.variant(variant):
            regions = regions_by_snippet.get(snippet.id, [])
            flags = flags_by_snippet.get(snippet.id, [])
            n_regions += len(regions)
            for region, flag in zip(regions, flags):
                if flag is None:
                    flag = any(region.span.overlaps(a) for a in snippet.aois)
                n_overlap += 1 if flag else 0
            for aoi in snippet.aois:
                n_aois += 1
                if any(r.span.overlaps(aoi) for r in regions):
                    n_hit += 1
        out[variant] = {
            "regions": n_regions,
            "regions_overlapping_aoi": n_overlap,
            "regions_novel": n_regions - n_overlap,
            "aois": n_aois,
            "aois_detected": n_hit,
            "aois_missed": n_aois - n_hit,
            "detection_rate": (n_hit / n_aois) if n_aois else None,
        }
    write_json(out_path, out)


@cli.command("report")
@click.option("--profiles", "profiles_path", required=True, type=click.Path(exists=True))
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--regions", "regions_path", default=None, type=click.Path(exists=True))
@click.option("--snippet", "snippet_id", default=None,
              help="render a single snippet only")
def cmd_report(profiles_path, corpus_path, regions_path, snippet_id):
    """Render per-token perplexity heat strips to the terminal."""
    corpus = load_corpus(corpus_path)
    profiles = _load_profiles(profiles_path, corpus)
    regions_by_snippet = {}
    if regions_path:
        for _, obj in read_jsonl(regions_path):
            region, _flag = regions_mod.region_from_dict(obj)
            regions_by_snippet.setdefault(region.snippet_id, []).append(region)
    ids = [snippet_id] if snippet_id else sorted(profiles)
    for sid in ids:
        if sid not in profiles:
            raise DataError(f"no profile for snippet {sid!r}")
        click.echo(
            report_mod.render_heat_strip(
                profiles[sid], corpus.by_id[sid].source,
                regions_by_snippet.get(sid),
            )
        )
        click.echo("")


def main(argv=None):
    try:
        return cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:
        sys.exit(exc.exit_code)
    except click.UsageError as exc:
        click.echo(f"usage error: {exc.format_message()}", err=True)
        sys.exit(EXIT_USAGE)
    except click.ClickException as exc:
        exc.show()
        sys.exit(EXIT_USAGE)
    except click.exceptions.Abort:
        sys.exit(EXIT_USAGE)
    except BackendError as exc:
        click.echo(f"backend error: {exc}", err=True)
        sys.exit(EXIT_BACKEND)
    except (DataError, ConfusionLensError) as exc:
        click.echo(f"data error: {exc}", err=True)
        sys.exit(EXIT_DATA)


if __name__ == "__main__":
    main()
