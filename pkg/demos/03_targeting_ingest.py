"""Ingest ad-library targeting reports from the shipped replay directory.

Reports arrive as daily snapshots of weekly aggregates: the same
(advertiser, week) shows up on several collection days with growing
totals, some requests come back with no data at all, and everything is
rate limited.  Normalization deduplicates windows, converts budget
fractions to spend, and keeps collection bookkeeping.
"""

import os

from proxyaudit import RateLimiter, ReplayFetcher, collect_targeting_data
from proxyaudit.adlib import dataset_stats, micros_to_millions, normalize_snapshots

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")

fetcher = ReplayFetcher(os.path.join(FIXTURES, "adlib_replay"))
print("replay directory covers %d collection days" % len(fetcher.dates()))

# Fixtures need no pacing; against a live-ish endpoint the limiter is
# what keeps the crawl polite.
result = collect_targeting_data(fetcher, RateLimiter(min_delay_ms=0))
print("requests=%d missing=%d transport_failures=%d parse_failures=%d"
      % (result.stats.requests, result.stats.missing,
         result.stats.transport_failures, result.stats.parse_failures))

dataset = normalize_snapshots(result.snapshots, collection=result.stats)
stats = dataset_stats(dataset)

print("\nadvertisers: %d, deduplicated windows: %d"
      % (stats.advertiser_count, stats.window_count))
print("unique criteria by kind: %s" % stats.unique_by_kind)
print("inclusion usages: %d, exclusion usages: %d"
      % (stats.inclusion_usages, stats.exclusion_usages))
print("missing-report rate: %.3f" % stats.missing_rate)
print("report delay histogram (days -> windows): %s" % stats.delay_histogram)

spends = dataset.spend_by_criterion("Include", kinds=("Interest",))
top = sorted(spends.items(), key=lambda kv: (-kv[1], kv[0]))[:8]
print("\ntop included interests by spend:")
for name, micros in top:
    print("  %-16s %s" % (name, micros_to_millions(micros)))
