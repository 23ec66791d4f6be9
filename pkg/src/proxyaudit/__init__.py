"""proxyaudit: measure how ad-targeting criteria act as proxies for
political affiliation and race, against a synthetic ground-truth world."""

__version__ = "0.1.0"

from .errors import (BackendError, ConfigError, DataError, FitError,
                     PayloadError, ProxyAuditError, ReplayMissError)
from .skew import (DEFAULT_TERTILE_THRESHOLDS, Leaning, SkewScore,
                   SkewThresholds, classify_tertile, compute_skew,
                   derive_tertile_thresholds, skew_histogram, skew_table)
from .synthworld import (PlantedInterest, Population, WorldConfig,
                         export_voter_file, generate_population, true_skew)
from .audiences import (AudienceSpec, VoterRecord, build_uniform_audience,
                        load_voter_records, verify_disjoint)
from .reach import (EstimateMatrix, NoiseModel, ReachEstimate, ReachQuery,
                    ReplayBackend, SyntheticBackend, batch_estimate,
                    coverage_fraction, estimate_reach)
from .pageskew import (DomainBiasTable, InterestPagesRecord, PageSkewResult,
                       compute_page_skew, load_domain_bias,
                       load_interest_pages, pruning_tradeoff_curve,
                       rank_domain_prevalence)
from .adlib import (TargetingCriterion, TargetingDataset,
                    TargetingReportSnapshot, dataset_stats,
                    normalize_snapshots, parse_targeting_report)
from .fetch import (MISSING, HttpFetcher, RateLimiter, ReplayFetcher,
                    RetryPolicy, collect_targeting_data,
                    fetch_advertiser_list, fetch_targeting_report)
from .analytics import (AffiliationRecord, FitResult, SpendSkewPoint,
                        compute_spend_skew_points, coverage_correlation,
                        fit_spend_vs_audience_skew, load_affiliations,
                        spend_distribution, top_spend_table, usage_shares)
