"""Join targeting data with affiliations and skews: who targets what?

This is the downstream analysis: collapse advertiser labels into
Conservatives/Progressives, classify interests into skew tertiles, then
ask how each side's interest usage and spend line up with the skews.
Ends by fitting spend skew as a sigmoid in audience skew and emitting
SVG charts (with CSV siblings) under demos/output/.

Needs skew_table.csv from a pipeline run; run this first if missing:

    proxyaudit all --config demos/fixtures/demo_config.json --out demos/output
"""

import os
import sys

from proxyaudit import (compute_spend_skew_points, fit_spend_vs_audience_skew,
                        load_affiliations, spend_distribution, top_spend_table,
                        usage_shares)
from proxyaudit.adlib import dataset_from_json, micros_to_millions
from proxyaudit.analytics import CONSERVATIVES, PROGRESSIVES, leanings_from_scores
from proxyaudit.errors import DataError
from proxyaudit.report import emit_plots
from proxyaudit.skew import SkewThresholds, read_skew_table

HERE = os.path.dirname(__file__)
FIXTURES = os.path.join(HERE, "fixtures")
OUTPUT = os.path.join(HERE, "output")

for needed in ("skew_table.csv", "dataset.json"):
    if not os.path.exists(os.path.join(OUTPUT, needed)):
        sys.exit("missing %s; run the pipeline first (see module docstring)" % needed)

dataset = dataset_from_json(os.path.join(OUTPUT, "dataset.json"))
table = read_skew_table(os.path.join(OUTPUT, "skew_table.csv"))
affiliations, _ = load_affiliations(os.path.join(FIXTURES, "affiliations.csv"))

rd = {i: s["RD"] for i, s in table.items() if "RD" in s}
thresholds = SkewThresholds(-0.073, 0.063)
leanings = leanings_from_scores(rd, thresholds)

# Interest-use shares per side: does each side use congruent interests?
shares = usage_shares(dataset, affiliations, leanings)
print("interest-use shares (fraction of each side's usages):")
for group in (CONSERVATIVES, PROGRESSIVES):
    print("  %s:" % group)
    for cell, fraction in sorted(shares.fractions[group].items()):
        print("    %-28s %5.1f%%" % ("%s / %s" % cell, 100 * fraction))

# Spend distributions: aligned vs opposite interests, inclusion mode.
print("\nmedian spend per included interest:")
for group, own in ((CONSERVATIVES, "RepublicanSkew"), (PROGRESSIVES, "DemocraticSkew")):
    aligned = {i for i, l in leanings.items() if l.value == own}
    opposite = {i for i, l in leanings.items()
                if l.value in ("RepublicanSkew", "DemocraticSkew") and i not in aligned}
    try:
        own_dist = spend_distribution(dataset, affiliations, group, "Include",
                                      interests=aligned)
        other_dist = spend_distribution(dataset, affiliations, group, "Include",
                                        interests=opposite)
        print("  %-14s aligned %s vs opposite %s"
              % (group, micros_to_millions(int(own_dist.median)),
                 micros_to_millions(int(other_dist.median))))
    except DataError as exc:
        print("  %-14s (%s)" % (group, exc))

# Spend skew vs audience skew, both modes.
bundle = {"fits": []}
for mode in ("Include", "Exclude"):
    points = compute_spend_skew_points(dataset, affiliations, rd, mode)
    fit = fit_spend_vs_audience_skew(points)
    print("\n%s fit: spend_skew = 2*sigmoid(%.2f + %.2f*audience_skew) - 1, "
          "R^2=%.2f over %d interests"
          % (mode, fit.intercept, fit.coefficient, fit.r_squared, fit.n_points))
    bundle["fits"].append({
        "mode": mode, "intercept": fit.intercept, "coefficient": fit.coefficient,
        "r_squared": fit.r_squared, "n_points": fit.n_points,
        "points": [[p.audience_skew, p.spend_skew] for p in points]})

result = emit_plots(bundle, OUTPUT)
print("\nwrote %s" % ", ".join(result.written))

# The big table: top interests by total spend, with all four skews.
print("\ntop 10 interests by spend:")
rows = top_spend_table(dataset, table, 10, leanings=leanings)
for row in rows:
    cells = " ".join("   -  " if row.skews[p] is None else "%+.2f " % row.skews[p]
                     for p in ("RD", "WB", "WH", "BH"))
    print("  %-16s excl %s incl %s  %s"
          % (row.interest, micros_to_millions(row.exclusion_spend_micros),
             micros_to_millions(row.inclusion_spend_micros), cells))
