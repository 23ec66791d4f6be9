"""Deterministic demo fixture generator.

Writes a self-contained fixture set (world config, page data, domain
biases, advertiser affiliations, and a replay directory of targeting
reports) that exercises every pipeline command at desk scale.  The
shipped copy lives in demos/fixtures; `python -m proxyaudit.demo DIR`
regenerates it byte-for-byte.

The fixture plants known structure on purpose: interest audience skews
span [-0.8, 0.8], two interests are too rare to score reliably (their
report cells render "-"), conservative advertisers spend more on
Republican-skewing interests and exclude Democratic-skewing ones (and
vice versa), and page-domain biases track the planted skews so the two
skew metrics correlate.
"""

from __future__ import annotations

import datetime
import json
import os
import sys

import numpy as np

N_INTERESTS = 120
POLITICAL = ("Politics", "Voting", "Election")
DATES = [datetime.date(2022, 10, d) for d in (17, 18, 24, 25)]
WINDOWS = {  # snapshot date -> window start
    datetime.date(2022, 10, 17): datetime.date(2022, 10, 8),
    datetime.date(2022, 10, 18): datetime.date(2022, 10, 8),
    datetime.date(2022, 10, 24): datetime.date(2022, 10, 15),
    datetime.date(2022, 10, 25): datetime.date(2022, 10, 15),
}

ADVERTISERS = [
    ("acct_gop_main", "GOP"), ("acct_gop_state", "GOP"),
    ("acct_rpac_one", "R-PACs"), ("acct_rpac_two", "R-PACs"),
    ("acct_con_voice", "Conservative"),
    ("acct_dem_main", "Dems"), ("acct_dem_state", "Dems"),
    ("acct_dpac_one", "D-PACs"), ("acct_dpac_two", "D-PACs"),
    ("acct_prog_voice", "Progressive"),
    ("acct_nonprofit", "Non"), ("acct_issue_misc", "Other"),
    ("acct_indie", "Independent"),
    ("acct_unlabeled_a", None), ("acct_unlabeled_b", None),
]


def interest_names():
    names = list(POLITICAL)
    names += ["Interest %03d" % i for i in range(N_INTERESTS - len(POLITICAL))]
    return names


def planted_skews(rng):
    """interest -> planted RD skew; political names stay near neutral."""
    names = interest_names()
    skews = {}
    levels = [-0.8, -0.4, 0.0, 0.4, 0.8]
    for i, name in enumerate(names):
        if name in POLITICAL:
            skews[name] = 0.05
        else:
            skews[name] = levels[i % 5] + float(rng.uniform(-0.05, 0.05))
            skews[name] = float(np.clip(skews[name], -0.9, 0.9))
    return skews


def build_world_section(rng):
    skews = planted_skews(rng)
    interests = []
    for i, name in enumerate(interest_names()):
        # Two deliberately rare interests: their audience counts fall
        # under the reliability floor and render "-" in reports.
        rare = name in ("Interest 100", "Interest 101")
        base = 0.004 if rare else float(rng.uniform(0.08, 0.30))
        entry = {"interest_id": name, "base_rate": round(base, 4),
                 "skews": {"RD": round(skews[name], 3)}}
        if i % 3 == 0 and not rare:
            entry["skews"]["WB"] = round(float(rng.uniform(-0.5, 0.5)), 3)
        interests.append(entry)
    return {
        "population_size": 12000,
        "party_mix": {"REP": 0.3, "DEM": 0.3, "OTH": 0.4},
        "race_mix": {"WHITE": 0.4, "BLACK": 0.25, "HISPANIC": 0.25, "OTHER": 0.1},
        "activity_rate": 1.0,
        "rng_seed": 2022,
        "interests": interests,
    }, skews


def write_page_fixtures(directory, skews, rng):
    """Interest pages plus a bias table whose scores track planted skews."""
    domains = ["site%03d.com" % i for i in range(150)]
    bias_rows = {}
    pages = []
    names = interest_names()
    for idx, name in enumerate(names):
        n_urls = 7 + idx % 4
        chosen = []
        if rng.random() < 0.9:
            chosen.append("walmart.com")
        while len(chosen) < n_urls:
            domain = domains[int(rng.integers(0, len(domains)))]
            if domain not in chosen:
                chosen.append(domain)
        urls = ["https://www.%s/about" % d for d in chosen]
        pages.append({"interest_id": name, "urls": urls})
        for domain in chosen:
            if domain == "walmart.com":
                continue
            score = skews[name] + float(rng.normal(0, 0.15))
            bias_rows.setdefault(domain, []).append(score)

    with open(os.path.join(directory, "interest_pages.jsonl"), "w",
              encoding="utf-8") as fh:
        for record in pages:
            fh.write(json.dumps(record) + "\n")

    with open(os.path.join(directory, "domain_bias.csv"), "w",
              encoding="utf-8") as fh:
        fh.write("domain,score\n")
        fh.write("walmart.com,0.0\n")
        for domain in sorted(bias_rows):
            # Leave ~30% of domains unscored: lookups are never complete.
            if rng.random() < 0.3:
                continue
            score = float(np.clip(np.mean(bias_rows[domain]), -1.0, 1.0))
            fh.write("%s,%.3f\n" % (domain, score))


def write_affiliations(directory):
    with open(os.path.join(directory, "affiliations.csv"), "w",
              encoding="utf-8") as fh:
        fh.write("advertiser_id,raw_label\n")
        for advertiser, label in ADVERTISERS:
            if label is not None:
                fh.write("%s,%s\n" % (advertiser, label))


def _advertiser_side(label):
    if label in ("GOP", "R-PACs", "Conservative"):
        return "R"
    if label in ("Dems", "D-PACs", "Progressive"):
        return "D"
    return "O"


def _pick_interests(names, skews, side, rng):
    """Congruent-heavy selection: mostly aligned targets, a few
    incongruent ones, and exclusions of the opposite side."""
    aligned = [n for n in names if (skews[n] > 0.2) == (side == "R")
               and abs(skews[n]) > 0.2]
    opposite = [n for n in names if n not in aligned and abs(skews[n]) > 0.2]
    neutral = [n for n in names if abs(skews[n]) <= 0.2]
    include, exclude = [], []
    for name in POLITICAL:
        include.append((name, float(rng.uniform(0.4, 0.9))))
    for name in sorted(rng.choice(aligned, size=14, replace=False)):
        include.append((name, float(rng.uniform(0.25, 0.8))))
    for name in sorted(rng.choice(neutral, size=6, replace=False)):
        include.append((name, float(rng.uniform(0.05, 0.3))))
    for name in sorted(rng.choice(opposite, size=2, replace=False)):
        include.append((name, float(rng.uniform(0.01, 0.08))))
    for name in sorted(rng.choice(opposite, size=4, replace=False)):
        exclude.append((name, float(rng.uniform(0.15, 0.5))))
    for name in sorted(rng.choice(aligned, size=1, replace=False)):
        exclude.append((name, float(rng.uniform(0.01, 0.05))))
    return include, exclude


def write_replay_dir(directory, skews, rng):
    replay = os.path.join(directory, "adlib_replay")
    os.makedirs(replay, exist_ok=True)
    names = interest_names()
    rare_spenders = {"Interest 100": "acct_gop_main", "Interest 101": "acct_dem_main"}
    for advertiser, label in ADVERTISERS:
        side = _advertiser_side(label)
        if side == "O":
            include = [(name, float(rng.uniform(0.2, 0.7))) for name in POLITICAL]
            exclude = []
        else:
            include, exclude = _pick_interests(names, skews, side, rng)
        for name, spender in rare_spenders.items():
            if advertiser == spender:
                exclude.append((name, float(rng.uniform(0.2, 0.4))))
        base_budget = float(rng.uniform(0.8e6, 4.5e6))
        for snapshot_date in DATES:
            window_start = WINDOWS[snapshot_date]
            window_end = window_start + datetime.timedelta(days=6)
            # Same window observed on consecutive days: totals grow.
            day_in_window = (snapshot_date - window_end).days
            total = round(base_budget * (0.8 + 0.1 * day_in_window), 2)
            criteria = []
            for name, fraction in include:
                criteria.append({"name": name, "kind": "Interest",
                                 "mode": "Include",
                                 "num_ads": int(rng.integers(1, 9)),
                                 "spend_fraction": round(fraction, 4)})
            for name, fraction in exclude:
                criteria.append({"name": name, "kind": "Interest",
                                 "mode": "Exclude",
                                 "num_ads": int(rng.integers(1, 5)),
                                 "spend_fraction": round(fraction, 4)})
            criteria.append({"name": "Parents", "kind": "Demographic",
                             "mode": "Include", "num_ads": 1,
                             "spend_fraction": 0.1})
            criteria.append({"name": "Engaged Shoppers", "kind": "Behavior",
                             "mode": "Include", "num_ads": 1,
                             "spend_fraction": 0.05})
            payload = {
                "advertiser_id": advertiser,
                "window_start": window_start.isoformat(),
                "window_end": window_end.isoformat(),
                "total_spend": total,
                "criteria": criteria,
            }
            path = os.path.join(replay, "%s_%s.json" % (advertiser,
                                                        snapshot_date.isoformat()))
            with open(path, "w", encoding="utf-8") as fh:
                json.dump(payload, fh, indent=0, sort_keys=True)
                fh.write("\n")
    # A few no-data collection days.
    for advertiser, date in (("acct_unlabeled_b", DATES[0]),
                             ("acct_issue_misc", DATES[2]),
                             ("acct_rpac_two", DATES[1])):
        path = os.path.join(replay, "%s_%s.missing" % (advertiser, date.isoformat()))
        os.remove(os.path.join(replay, "%s_%s.json" % (advertiser, date.isoformat())))
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("")


def write_config(directory, world_section):
    config = {
        "seed": 2022,
        "world": world_section,
        "audiences": {
            "specs": [
                {"label": "REP", "requested_size": 1500, "seed": 11},
                {"label": "DEM", "requested_size": 1500, "seed": 12},
                {"label": "WHITE", "requested_size": 1500, "seed": 13},
                {"label": "BLACK", "requested_size": 1500, "seed": 14},
                {"label": "HISPANIC", "requested_size": 1500, "seed": 15},
            ],
        },
        "estimate": {
            "backend": "synthetic",
            "noise": {"mode": "round2"},
        },
        "skew": {
            "pairs": ["RD", "WB", "WH", "BH"],
            "min_reliable_count": 50,
            "thresholds": "derive",
            "bin_width": 0.1,
        },
        "pageskew": {
            "interest_pages": "interest_pages.jsonl",
            "domain_bias": "domain_bias.csv",
            "drop_top_k": 1,
            "k_range": [0, 1, 2, 3, 4, 5, 6],
        },
        "ingest": {
            "replay_dir": "adlib_replay",
            "min_delay_ms": 0,
            "max_retries": 3,
        },
        "analyze": {
            "affiliations": "affiliations.csv",
            "top_n": 60,
            "political_names": list(POLITICAL),
        },
    }
    with open(os.path.join(directory, "demo_config.json"), "w",
              encoding="utf-8") as fh:
        json.dump(config, fh, indent=1, sort_keys=True)
        fh.write("\n")


def make_demo_fixtures(directory, seed: int = 20221108) -> None:
    os.makedirs(directory, exist_ok=True)
    rng = np.random.default_rng(seed)
    world_section, skews = build_world_section(rng)
    write_config(directory, world_section)
    write_page_fixtures(directory, skews, rng)
    write_affiliations(directory)
    write_replay_dir(directory, skews, rng)


if __name__ == "__main__":
    target = sys.argv[1] if len(sys.argv) > 1 else "demos/fixtures"
    make_demo_fixtures(target)
    print("demo fixtures written to %s" % target)
