"""Command-line pipeline: world -> audiences -> estimate -> skew,
pageskew, ingest -> analyze -> report.

Each command reads the declarative config (flags win), writes its
artifacts into the output directory, and records every output with a
content hash in a per-command manifest.  Exit codes: 0 success, 1 data
error, 2 configuration error, 3 backend/transport failure.
"""

from __future__ import annotations

import argparse
import csv
import glob
import hashlib
import json
import logging
import os
import sys
from typing import Dict, List, Optional

from . import __version__, report
from .adlib import (dataset_from_json, dataset_stats, dataset_to_json,
                    micros_to_millions, normalize_snapshots)
from .analytics import (CONSERVATIVES, DEFAULT_POLITICAL_NAMES, PROGRESSIVES,
                        compute_spend_skew_points, coverage_correlation,
                        fit_spend_vs_audience_skew, leanings_from_scores,
                        load_affiliations, spend_distribution, top_spend_table,
                        usage_shares)
from .audiences import (audience_from_json, audience_to_json,
                        build_uniform_audience, load_voter_records,
                        size_mismatch_warning, verify_disjoint)
from .config import RunConfig, world_config_from_section
from .errors import (BackendError, ConfigError, DataError, ProxyAuditError)
from .fetch import (HttpFetcher, RateLimiter, ReplayFetcher, RetryPolicy,
                    collect_targeting_data)
from .pageskew import (load_domain_bias, load_interest_pages,
                       mention_coverage, compute_page_skew,
                       pruning_tradeoff_curve, rank_domain_prevalence)
from .reach import (NoiseModel, ReplayBackend, SyntheticBackend,
                    batch_estimate, read_matrix, write_matrix)
from .skew import (Leaning, PAIR_AUDIENCES, SkewScore, SkewThresholds,
                   derive_tertile_thresholds, skew_histogram, skew_table,
                   read_skew_table, write_skew_table)
from .synthworld import (PARTIES, RACES, export_voter_file,
                         generate_population, population_from_json,
                         population_to_json)

log = logging.getLogger("proxyaudit")

VOTER_FILE = "voter_file.csv"
POPULATION = "population.json"
ESTIMATES = "estimates.csv"
CHECKPOINT = "estimate_checkpoint.csv"
SKEW_TABLE = "skew_table.csv"
THRESHOLDS = "thresholds.json"
PAGE_SKEW = "page_skew.csv"
PRUNING_CURVE = "pruning_curve.csv"
DATASET = "dataset.json"
BUNDLE = "analysis_bundle.json"

MODES = ("Include", "Exclude")
LEANING_ORDER = (Leaning.DEMOCRATIC_SKEW, Leaning.NEUTRAL, Leaning.REPUBLICAN_SKEW)


def _sha(path) -> str:
    return report.sha256_file(path)


def _hash_tree(directory) -> str:
    digest = hashlib.sha256()
    for name in sorted(os.listdir(directory)):
        path = os.path.join(directory, name)
        if os.path.isfile(path):
            digest.update(name.encode("utf-8"))
            digest.update(bytes.fromhex(_sha(path)))
    return digest.hexdigest()


def _write_json(path, payload) -> str:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return os.path.basename(path)


def _write_csv(path, header, rows) -> str:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    return os.path.basename(path)


def _r(value) -> str:
    return "" if value is None else repr(float(value))


def _load_audiences(out: str) -> list:
    specs = [audience_from_json(path)
             for path in sorted(glob.glob(os.path.join(out, "audience_*.json")))]
    if not specs:
        raise ConfigError("no audience_*.json files in %s; run `audiences` first" % out)
    return specs


def _finish(out, command, cfg_echo, inputs, outputs) -> None:
    # Inputs living inside the output directory are keyed by relative
    # path, so reruns into different directories stay byte-identical.
    normalized = {}
    for path, digest in inputs.items():
        key = str(path)
        absolute = os.path.abspath(key)
        if absolute.startswith(os.path.abspath(out) + os.sep):
            key = os.path.relpath(absolute, out)
        normalized[key] = digest
    report.write_manifest(out, command, cfg_echo, normalized, outputs)
    os.replace(os.path.join(out, "manifest.json"),
               os.path.join(out, "manifest_%s.json" % command))
    print("%s: wrote %d artifacts to %s" % (command, len(outputs), out))


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_world(cfg: RunConfig, out: str, args) -> None:
    section = cfg.section("world")
    if not section:
        raise ConfigError("config has no `world` section")
    world = world_config_from_section(section, cfg.seed)
    if args.seed is not None:
        world.rng_seed = args.seed
    population = generate_population(world)
    outputs = []
    export_voter_file(population, os.path.join(out, VOTER_FILE))
    outputs.append(VOTER_FILE)
    population_to_json(population, os.path.join(out, POPULATION))
    outputs.append(POPULATION)
    by_party = {p: 0 for p in PARTIES}
    by_race = {r: 0 for r in RACES}
    active = 0
    for member in population.members:
        by_party[member.party] += 1
        by_race[member.race] += 1
        active += member.active
    outputs.append(_write_json(os.path.join(out, "world_summary.json"), {
        "population_size": len(population),
        "active": active,
        "interests": len(population.interest_ids),
        "by_party": by_party,
        "by_race": by_race,
        "rng_seed": world.rng_seed,
    }))
    _finish(out, "world", section, {}, outputs)


def cmd_audiences(cfg: RunConfig, out: str, args) -> None:
    section = cfg.section("audiences")
    voter_path = (cfg.resolve(section["voter_file"]) if section.get("voter_file")
                  else os.path.join(out, VOTER_FILE))
    if not os.path.isfile(voter_path):
        raise ConfigError("voter file not found: %s" % voter_path)
    records, reject = load_voter_records(voter_path)
    specs = section.get("specs")
    if not specs:
        raise ConfigError("config audiences.specs must list at least one audience")
    built = []
    outputs = []
    for i, spec in enumerate(specs):
        audience = build_uniform_audience(
            records, spec["label"], int(spec["requested_size"]),
            int(spec.get("seed", cfg.seed + i)))
        built.append(audience)
        name = "audience_%s.json" % audience.label
        audience_to_json(audience, os.path.join(out, name))
        outputs.append(name)
    overlaps = {}
    for pair, (label_a, label_b) in PAIR_AUDIENCES.items():
        by_label = {a.label: a for a in built}
        if label_a in by_label and label_b in by_label:
            overlaps[pair] = verify_disjoint(by_label[label_a], by_label[label_b])
            size_mismatch_warning(by_label[label_a], by_label[label_b])
    outputs.append(_write_json(os.path.join(out, "audiences_report.json"), {
        "accepted_records": reject.accepted_count,
        "rejected_records": reject.rejected_count,
        "sizes": {a.label: len(a) for a in built},
        "shortfalls": sorted(a.label for a in built if a.shortfall),
        "pair_overlaps": overlaps,
    }))
    _finish(out, "audiences", section, {voter_path: _sha(voter_path)}, outputs)


def cmd_estimate(cfg: RunConfig, out: str, args) -> None:
    section = cfg.section("estimate")
    audiences = _load_audiences(out)
    inputs = {}
    backend_kind = section.get("backend", "synthetic")
    if backend_kind == "synthetic":
        pop_path = (cfg.resolve(section["population"]) if section.get("population")
                    else os.path.join(out, POPULATION))
        if not os.path.isfile(pop_path):
            raise ConfigError("population file not found: %s" % pop_path)
        inputs[pop_path] = _sha(pop_path)
        noise_cfg = section.get("noise", {})
        backend = SyntheticBackend(
            population_from_json(pop_path),
            NoiseModel(mode=noise_cfg.get("mode", "round2"),
                       sigma=float(noise_cfg.get("sigma", 0.0)),
                       seed=int(noise_cfg.get("seed", cfg.seed))))
        interests = section.get("interests")
        if interests is None:
            interests = [e["interest_id"] for e in cfg.section("world").get("interests", [])]
        if not interests:
            raise ConfigError("no interests to estimate; set estimate.interests")
    elif backend_kind == "replay":
        fixture = cfg.require_file(section.get("fixture"), "estimate.fixture")
        inputs[fixture] = _sha(fixture)
        backend = ReplayBackend(fixture)
        fixture_matrix = read_matrix(fixture)
        interests = section.get("interests") or fixture_matrix.interests
    else:
        raise ConfigError("unknown estimate backend %r" % backend_kind)

    matrix = batch_estimate(backend, audiences, interests,
                            checkpoint_path=os.path.join(out, CHECKPOINT))
    outputs = [CHECKPOINT]
    write_matrix(matrix, os.path.join(out, ESTIMATES))
    outputs.append(ESTIMATES)
    if matrix.errors:
        outputs.append(_write_csv(
            os.path.join(out, "estimate_errors.csv"),
            ["audience_label", "interest_id", "error"],
            [[label, interest or "", message]
             for (label, interest), message in sorted(matrix.errors.items())]))
    _finish(out, "estimate", section, inputs, outputs)


def _thresholds_from_config(section: dict, scores) -> SkewThresholds:
    configured = section.get("thresholds", "derive")
    if configured == "derive":
        return derive_tertile_thresholds(scores)
    if isinstance(configured, dict):
        return SkewThresholds(float(configured["democratic_below"]),
                              float(configured["republican_at_or_above"]))
    raise ConfigError("skew.thresholds must be \"derive\" or an object")


def cmd_skew(cfg: RunConfig, out: str, args) -> None:
    section = cfg.section("skew")
    estimates_path = (cfg.resolve(section["estimates"]) if section.get("estimates")
                      else os.path.join(out, ESTIMATES))
    if not os.path.isfile(estimates_path):
        raise ConfigError("estimates not found: %s" % estimates_path)
    matrix = read_matrix(estimates_path)
    pairs = tuple(section.get("pairs", ("RD", "WB", "WH", "BH")))
    table = skew_table(matrix, pairs,
                       min_reliable_count=int(section.get("min_reliable_count", 50)))
    outputs = []
    write_skew_table(table, os.path.join(out, SKEW_TABLE))
    outputs.append(SKEW_TABLE)
    rd_scores = [scores["RD"] for scores in table.values() if "RD" in scores]
    thresholds = _thresholds_from_config(section, rd_scores)
    outputs.append(_write_json(os.path.join(out, THRESHOLDS), {
        "democratic_below": thresholds.democratic_below,
        "republican_at_or_above": thresholds.republican_at_or_above,
        "degenerate": thresholds.degenerate,
        "source": "derive" if section.get("thresholds", "derive") == "derive" else "configured",
    }))
    _finish(out, "skew", section, {estimates_path: _sha(estimates_path)}, outputs)


def cmd_pageskew(cfg: RunConfig, out: str, args) -> None:
    section = cfg.section("pageskew")
    pages_path = cfg.require_file(section.get("interest_pages"), "pageskew.interest_pages")
    bias_path = cfg.require_file(section.get("domain_bias"), "pageskew.domain_bias")
    inputs = {pages_path: _sha(pages_path), bias_path: _sha(bias_path)}
    records, dropped = load_interest_pages(pages_path)
    table = load_domain_bias(bias_path)
    if not records:
        raise DataError("no interest-pages records in %s" % pages_path)
    prevalence = rank_domain_prevalence(records)
    drop_top_k = int(section.get("drop_top_k", 0))
    results = [compute_page_skew(r, table, drop_top_k, prevalence) for r in records]

    outputs = []
    page_table = {
        r.interest_id: {"PAGE": SkewScore(
            value=r.value, pair="PAGE",
            n_a_i=r.matched, n_a=r.total, n_b_i=r.dropped, n_b=0,
            reliable=r.defined,
            reason=None if r.defined else "no matched domains")}
        for r in results
    }
    write_skew_table(page_table, os.path.join(out, PAGE_SKEW))
    outputs.append(PAGE_SKEW)
    outputs.append(_write_csv(os.path.join(out, "domain_prevalence.csv"),
                              ["domain", "fraction"],
                              [[d, _r(f)] for d, f in prevalence]))
    mentions, unique = mention_coverage(records, table)
    outputs.append(_write_json(os.path.join(out, "page_coverage.json"), {
        "records": len(records),
        "defined": sum(1 for r in results if r.defined),
        "dropped_urls": len(dropped),
        "mention_coverage": mentions,
        "unique_domain_coverage": unique,
        "drop_top_k": drop_top_k,
    }))

    voter_path = (cfg.resolve(section["voter_skews"]) if section.get("voter_skews")
                  else os.path.join(out, SKEW_TABLE))
    if os.path.isfile(voter_path):
        inputs[voter_path] = _sha(voter_path)
        voter_table = read_skew_table(voter_path)
        voter_rd = {interest: scores["RD"].value
                    for interest, scores in voter_table.items()
                    if "RD" in scores and scores["RD"].value is not None}
        k_range = section.get("k_range", list(range(0, 8)))
        curve = pruning_tradeoff_curve(records, table, voter_rd, k_range)
        outputs.append(_write_csv(
            os.path.join(out, PRUNING_CURVE),
            ["k", "coverage", "pearson_r", "n_joint"],
            [[p.k, _r(p.coverage), _r(p.pearson_r), p.n_joint] for p in curve]))
    else:
        log.info("no voter skew table at %s; skipping pruning curve", voter_path)
    _finish(out, "pageskew", section, inputs, outputs)


def cmd_ingest(cfg: RunConfig, out: str, args) -> None:
    section = dict(cfg.section("ingest"))
    if args.replay_dir:
        section["replay_dir"] = args.replay_dir
        section.pop("endpoint", None)
    if args.endpoint:
        section["endpoint"] = args.endpoint
        section.pop("replay_dir", None)
    if args.min_delay_ms is not None:
        section["min_delay_ms"] = args.min_delay_ms
    if args.max_retries is not None:
        section["max_retries"] = args.max_retries

    inputs = {}
    if section.get("replay_dir"):
        replay_dir = cfg.resolve(section["replay_dir"])
        if not os.path.isdir(replay_dir):
            raise ConfigError("replay directory not found: %s" % replay_dir)
        fetcher = ReplayFetcher(replay_dir)
        inputs[replay_dir] = _hash_tree(replay_dir)
    elif section.get("endpoint"):
        fetcher = HttpFetcher(section["endpoint"])
        inputs[section["endpoint"]] = "endpoint"
    else:
        raise ConfigError("ingest needs --replay-dir or --endpoint (or config keys)")

    limiter = RateLimiter(min_delay_ms=float(section.get("min_delay_ms", 0)),
                          max_in_flight=int(section.get("max_in_flight", 1)))
    retry = RetryPolicy(max_retries=int(section.get("max_retries", 3)),
                        backoff_base_s=float(section.get("backoff_base_s", 0.2)))
    result = collect_targeting_data(fetcher, limiter, retry=retry)
    dataset = normalize_snapshots(result.snapshots, collection=result.stats)

    outputs = []
    dataset_to_json(dataset, os.path.join(out, DATASET))
    outputs.append(DATASET)
    stats = dataset_stats(dataset)
    outputs.append(_write_json(os.path.join(out, "dataset_stats.json"), {
        "advertiser_count": stats.advertiser_count,
        "window_count": stats.window_count,
        "unique_by_kind": stats.unique_by_kind,
        "unique_included_by_kind": stats.unique_included_by_kind,
        "unique_excluded_by_kind": stats.unique_excluded_by_kind,
        "inclusion_usages": stats.inclusion_usages,
        "exclusion_usages": stats.exclusion_usages,
        "missing_rate": stats.missing_rate,
        "delay_histogram": {str(k): v for k, v in stats.delay_histogram.items()},
    }))
    if result.failures:
        outputs.append(_write_csv(
            os.path.join(out, "fetch_failures.csv"),
            ["advertiser_id", "date", "error"],
            [[f.advertiser_id, f.date.isoformat() if f.date else "", f.error]
             for f in result.failures]))
    _finish(out, "ingest", section, inputs, outputs)


def _skew_value_cell(value) -> str:
    return "-" if value is None else "%.2f" % value


def cmd_analyze(cfg: RunConfig, out: str, args) -> None:
    section = cfg.section("analyze")
    dataset_path = (cfg.resolve(section["dataset"]) if section.get("dataset")
                    else os.path.join(out, DATASET))
    skew_path = (cfg.resolve(section["skew_table"]) if section.get("skew_table")
                 else os.path.join(out, SKEW_TABLE))
    affiliations_path = cfg.require_file(section.get("affiliations"), "analyze.affiliations")
    for path, what in ((dataset_path, "dataset"), (skew_path, "skew table")):
        if not os.path.isfile(path):
            raise ConfigError("%s not found: %s" % (what, path))
    inputs = {p: _sha(p) for p in (dataset_path, skew_path, affiliations_path)}

    dataset = dataset_from_json(dataset_path)
    table = read_skew_table(skew_path)
    affiliations, rejected = load_affiliations(affiliations_path)
    if rejected:
        log.warning("affiliations: %d rows rejected", len(rejected))

    thresholds_path = os.path.join(out, THRESHOLDS)
    rd_scores = {i: scores["RD"] for i, scores in table.items() if "RD" in scores}
    if os.path.isfile(thresholds_path):
        with open(thresholds_path, encoding="utf-8") as fh:
            t = json.load(fh)
        thresholds = SkewThresholds(t["democratic_below"], t["republican_at_or_above"],
                                    degenerate=t.get("degenerate", False))
    else:
        thresholds = derive_tertile_thresholds(rd_scores.values())
    leanings = leanings_from_scores(rd_scores, thresholds)

    outputs = []
    bundle: dict = {}

    # Usage shares per group x mode x leaning.
    shares = usage_shares(dataset, affiliations, leanings)
    rows = []
    for group in sorted(shares.fractions):
        for mode in MODES:
            for leaning in LEANING_ORDER:
                cell = (mode, leaning.value)
                rows.append([group, mode, leaning.value,
                             shares.counts[group].get(cell, 0),
                             _r(shares.fractions[group].get(cell, 0.0))])
        rows.append([group, "", "Unavailable", shares.unavailable[group], ""])
    outputs.append(_write_csv(os.path.join(out, "usage_shares.csv"),
                              ["group", "mode", "leaning", "count", "fraction"], rows))

    # Spend distributions per group x mode x leaning.
    leaning_sets: Dict[str, set] = {}
    for interest, leaning in leanings.items():
        leaning_sets.setdefault(leaning.value, set()).add(interest)
    cdf_entries = []
    summary_rows = []
    for group in (PROGRESSIVES, CONSERVATIVES):
        for mode in MODES:
            for leaning in LEANING_ORDER:
                interests = leaning_sets.get(leaning.value, set())
                try:
                    dist = spend_distribution(dataset, affiliations, group, mode,
                                              interests=interests)
                except DataError:
                    continue
                cdf_entries.append({
                    "group": group, "mode": mode, "leaning": leaning.value,
                    "spends_micros": dist.spends,
                    "median_micros": dist.median, "mean_micros": dist.mean,
                })
                summary_rows.append([group, mode, leaning.value, dist.count,
                                     _r(dist.median / 1e6), _r(dist.mean / 1e6)])
    outputs.append(_write_csv(os.path.join(out, "spend_summary.csv"),
                              ["group", "mode", "leaning", "n_interests",
                               "median_usd", "mean_usd"], summary_rows))
    bundle["spend_cdfs"] = cdf_entries

    # Spend-skew points and sigmoid fits.
    bundle["fits"] = []
    for mode in MODES:
        points = compute_spend_skew_points(dataset, affiliations, rd_scores, mode)
        outputs.append(_write_csv(
            os.path.join(out, "spend_skew_points_%s.csv" % mode.lower()),
            ["interest_id", "audience_skew", "spend_skew", "spend_r_usd", "spend_d_usd"],
            [[p.interest_id, _r(p.audience_skew), _r(p.spend_skew),
              _r(p.spend_r / 1e6), _r(p.spend_d / 1e6)] for p in points]))
        if len(points) >= 10:
            fit = fit_spend_vs_audience_skew(points)
            outputs.append(_write_json(os.path.join(out, "fit_%s.json" % mode.lower()), {
                "mode": mode, "intercept": fit.intercept, "coefficient": fit.coefficient,
                "r_squared": fit.r_squared, "n_points": fit.n_points,
            }))
            bundle["fits"].append({
                "mode": mode, "intercept": fit.intercept, "coefficient": fit.coefficient,
                "r_squared": fit.r_squared, "n_points": fit.n_points,
                "points": [[p.audience_skew, p.spend_skew] for p in points],
            })
        else:
            log.warning("mode %s: only %d spend-skew points, skipping fit",
                        mode, len(points))

    # Coverage correlations from the estimate matrix, when available.
    estimates_path = os.path.join(out, ESTIMATES)
    if os.path.isfile(estimates_path):
        inputs[estimates_path] = _sha(estimates_path)
        matrix = read_matrix(estimates_path)
        bundle["coverage"] = []
        for pair in ("RD", "WB", "WH", "BH"):
            if not all(label in matrix.totals for label in PAIR_AUDIENCES[pair]):
                continue
            try:
                corr = coverage_correlation(matrix, pair)
            except DataError:
                continue
            bundle["coverage"].append({
                "pair": pair, "pearson_r": corr.pearson_r,
                "points": [[i, a, b] for i, a, b in corr.points],
            })

    # Top-spend table.
    top_n = int(section.get("top_n", 60))
    political = tuple(section.get("political_names", DEFAULT_POLITICAL_NAMES))
    top = top_spend_table(dataset, table, top_n, leanings=leanings,
                          political_names=political)
    outputs.append(_write_csv(
        os.path.join(out, "top_spend.csv"),
        ["interest", "exclusion_spend_usd", "inclusion_spend_usd", "political",
         "s_rd", "s_wb", "s_wh", "s_bh"],
        [[row.interest,
          _r(row.exclusion_spend_micros / 1e6), _r(row.inclusion_spend_micros / 1e6),
          "x" if row.political else "",
          _skew_value_cell(row.skews.get("RD")), _skew_value_cell(row.skews.get("WB")),
          _skew_value_cell(row.skews.get("WH")), _skew_value_cell(row.skews.get("BH"))]
         for row in top]))
    lines = ["%-42s %9s %9s %4s %7s %7s %7s %7s"
             % ("interest", "excl", "incl", "pol", "S_RD", "S_WB", "S_WH", "S_BH")]
    for row in top:
        lines.append("%-42s %9s %9s %4s %7s %7s %7s %7s" % (
            row.interest[:42],
            micros_to_millions(row.exclusion_spend_micros),
            micros_to_millions(row.inclusion_spend_micros),
            "x" if row.political else "",
            _skew_value_cell(row.skews.get("RD")), _skew_value_cell(row.skews.get("WB")),
            _skew_value_cell(row.skews.get("WH")), _skew_value_cell(row.skews.get("BH"))))
    with open(os.path.join(out, "top_spend.txt"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    outputs.append("top_spend.txt")

    # Skew histograms for the report stage.
    histogram = skew_histogram(
        [score for scores in table.values() for score in scores.values()
         if score.pair in PAIR_AUDIENCES],
        bin_width=float(cfg.section("skew").get("bin_width", 0.1)))
    bundle["skew_histogram"] = {
        "bin_width": histogram.bin_width,
        "edges": histogram.edges,
        "counts": histogram.counts,
        "undefined": histogram.undefined,
    }

    # Pruning curve from the pageskew stage, when present.
    pruning_path = os.path.join(out, PRUNING_CURVE)
    if os.path.isfile(pruning_path):
        with open(pruning_path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            bundle["pruning"] = [
                {"k": int(row["k"]), "coverage": float(row["coverage"]),
                 "pearson_r": float(row["pearson_r"]) if row["pearson_r"] else None,
                 "n_joint": int(row["n_joint"])}
                for row in reader]

    report.write_bundle(bundle, os.path.join(out, BUNDLE))
    outputs.append(BUNDLE)
    _finish(out, "analyze", section, inputs, outputs)


def cmd_report(cfg: RunConfig, out: str, args) -> None:
    bundle_path = os.path.join(out, BUNDLE)
    if not os.path.isfile(bundle_path):
        raise ConfigError("analysis bundle not found: %s; run `analyze` first" % bundle_path)
    bundle = report.read_bundle(bundle_path)
    result = report.emit_plots(bundle, out)
    if result.skipped:
        print("report: skipped sections with no data: %s" % ", ".join(result.skipped))
    _finish(out, "report", {}, {bundle_path: _sha(bundle_path)}, result.written)


COMMANDS = {
    "world": cmd_world,
    "audiences": cmd_audiences,
    "estimate": cmd_estimate,
    "skew": cmd_skew,
    "pageskew": cmd_pageskew,
    "ingest": cmd_ingest,
    "analyze": cmd_analyze,
    "report": cmd_report,
}

PIPELINE_ORDER = ["world", "audiences", "estimate", "skew", "pageskew",
                  "ingest", "analyze", "report"]


def cmd_all(cfg: RunConfig, out: str, args) -> None:
    for name in PIPELINE_ORDER:
        COMMANDS[name](cfg, out, args)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="proxyaudit",
        description="Audit toolkit for proxy power of ad-targeting criteria")
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="declarative run config (JSON)")
    common.add_argument("--out", help="output directory (default: config `out`, else ./out)")
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in PIPELINE_ORDER + ["all"]:
        p = sub.add_parser(name, parents=[common])
        if name in ("ingest", "all"):
            p.add_argument("--replay-dir", help="replay directory of recorded reports")
            p.add_argument("--endpoint", help="mock HTTP endpoint URL")
            p.add_argument("--min-delay-ms", type=float, help="rate limit between requests")
            p.add_argument("--max-retries", type=int, help="retry budget per request")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    # Commands without these flags still read them via getattr.
    for flag in ("replay_dir", "endpoint", "min_delay_ms", "max_retries"):
        if not hasattr(args, flag):
            setattr(args, flag, None)
    try:
        cfg = RunConfig.load(args.config)
        if args.seed is not None:
            cfg.data["seed"] = args.seed
        out = args.out or cfg.resolve(cfg.data.get("out")) or os.path.join(os.getcwd(), "out")
        os.makedirs(out, exist_ok=True)
        if args.command == "all":
            cmd_all(cfg, out, args)
        else:
            COMMANDS[args.command](cfg, out, args)
    except ConfigError as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return 2
    except BackendError as exc:
        print("backend error: %s" % exc, file=sys.stderr)
        return 3
    except DataError as exc:
        print("data error: %s" % exc, file=sys.stderr)
        return 1
    except ProxyAuditError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
