"""Estimate interest skews from external-domain audiences instead of
voter records.

When voter records are unavailable, an interest's skew can still be
approximated: take the external domains popular among the interest's
users and average their known audience-bias scores.  Ubiquitous domains
(the big storefront shows up for 90% of interests here) dilute the
signal, so we also sweep the number of top domains dropped and watch the
coverage/correlation trade-off.
"""

import os

from proxyaudit import (compute_page_skew, load_domain_bias,
                        load_interest_pages, pruning_tradeoff_curve,
                        rank_domain_prevalence)
from proxyaudit.pageskew import mention_coverage
from proxyaudit.skew import read_skew_table

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")

records, dropped = load_interest_pages(os.path.join(FIXTURES, "interest_pages.jsonl"))
bias = load_domain_bias(os.path.join(FIXTURES, "domain_bias.csv"))
print("loaded %d interest-page records (%d bad urls) and %d domain biases"
      % (len(records), len(dropped), len(bias)))

mentions, unique = mention_coverage(records, bias)
print("bias table covers %.0f%% of domain mentions, %.0f%% of unique domains"
      % (100 * mentions, 100 * unique))

prevalence = rank_domain_prevalence(records)
print("\nmost prevalent domains:")
for domain, fraction in prevalence[:5]:
    print("  %-20s in %3.0f%% of interests" % (domain, 100 * fraction))

# Page skew with the single most prevalent domain pruned.
print("\nsample page skews (k=1):")
for record in records[:8]:
    result = compute_page_skew(record, bias, 1, prevalence)
    shown = "undefined" if result.value is None else "%+.3f" % result.value
    print("  %-14s %s  (matched %d of %d, dropped %d)"
          % (record.interest_id, shown, result.matched, result.total, result.dropped))

# If a voter-record skew table exists from a prior pipeline run, sweep k
# and report the trade-off; otherwise build a quick stand-in from the
# shipped page data itself.
voter_table_path = os.path.join(os.path.dirname(__file__), "output", "skew_table.csv")
if os.path.exists(voter_table_path):
    table = read_skew_table(voter_table_path)
    voter = {i: s["RD"].value for i, s in table.items()
             if "RD" in s and s["RD"].value is not None}
    print("\nusing voter-record skews from %s" % voter_table_path)
else:
    voter = {r.interest_id: compute_page_skew(r, bias, 1, prevalence).value
             for r in records}
    voter = {k: v for k, v in voter.items() if v is not None}
    print("\nno voter-record table found; sweeping against k=1 page skews")

print("%3s %9s %10s %8s" % ("k", "coverage", "pearson_r", "n_joint"))
for point in pruning_tradeoff_curve(records, bias, voter, range(0, 7)):
    r_text = "n/a" if point.pearson_r is None else "%.3f" % point.pearson_r
    print("%3d %9.2f %10s %8d" % (point.k, point.coverage, r_text, point.n_joint))
