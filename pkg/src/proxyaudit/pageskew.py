"""Page/domain-based skew estimation.

Second methodology: an interest's audience skew is approximated by
averaging known audience-bias scores of the external domains popular
among that interest's users.  Ubiquitous domains (storefronts that show
up for most interests) carry little signal, so the globally most
prevalent domains can be pruned before averaging; the pruning trade-off
curve quantifies what that costs in coverage and buys in agreement with
the voter-record metric.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from scipy import stats

from .domains import SuffixRules, normalize_url_domain, registrable_domain
from .errors import DataError

log = logging.getLogger(__name__)


@dataclass
class InterestPagesRecord:
    """Normalized external domains popular among one interest's users."""

    interest_id: str
    domains: List[str]


@dataclass
class DomainBiasTable:
    """domain -> audience-bias score in [-1, 1] (-1 all one side's users
    link to it, +1 all the other's)."""

    scores: Dict[str, float] = field(default_factory=dict)
    rejected: List[Tuple[int, str]] = field(default_factory=list)
    duplicates: int = 0

    def __contains__(self, domain):
        return domain in self.scores

    def __getitem__(self, domain):
        return self.scores[domain]

    def __len__(self):
        return len(self.scores)


@dataclass
class PageSkewResult:
    """Outcome of averaging domain biases for one interest.

    ``value`` is None exactly when no remaining domain matched the bias
    table.  matched <= total - dropped always holds.
    """

    interest_id: str
    value: Optional[float]
    matched: int
    total: int
    dropped: int

    @property
    def defined(self) -> bool:
        return self.value is not None


def load_domain_bias(source, rules: Optional[SuffixRules] = None) -> DomainBiasTable:
    """Read ``domain,score`` rows; scores outside [-1, 1] are rejected and
    reported, duplicate domains keep the last value with a warning."""
    table = DomainBiasTable()
    try:
        fh = open(source, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError("cannot read domain bias table %s: %s" % (source, exc)) from exc
    with fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or (line_no == 1 and line.lower() == "domain,score"):
                continue
            parts = line.split(",")
            if len(parts) != 2:
                table.rejected.append((line_no, "expected 2 columns"))
                continue
            domain = registrable_domain(parts[0], rules)
            if domain is None:
                table.rejected.append((line_no, "unparseable domain %r" % parts[0]))
                continue
            try:
                score = float(parts[1])
            except ValueError:
                table.rejected.append((line_no, "non-numeric score %r" % parts[1]))
                continue
            if not -1.0 <= score <= 1.0:
                table.rejected.append((line_no, "score %r outside [-1, 1]" % parts[1]))
                continue
            if domain in table.scores:
                table.duplicates += 1
                log.warning("duplicate bias entry for %s at line %d; keeping last",
                            domain, line_no)
            table.scores[domain] = score
    return table


def load_interest_pages(source, rules: Optional[SuffixRules] = None
                        ) -> Tuple[List[InterestPagesRecord], List[Tuple[int, str]]]:
    """Read JSON-lines records {"interest_id": ..., "urls": [...]}.

    URLs are reduced to registrable domains (deduplicated, order kept);
    malformed URLs and lines are dropped with a per-line report.  Records
    whose URLs all fail to parse are retained with an empty domain list.
    """
    records: List[InterestPagesRecord] = []
    dropped: List[Tuple[int, str]] = []
    try:
        fh = open(source, encoding="utf-8")
    except OSError as exc:
        raise DataError("cannot read interest pages %s: %s" % (source, exc)) from exc
    with fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                payload = json.loads(line)
                interest_id = str(payload["interest_id"])
                urls = payload["urls"]
                if not isinstance(urls, list):
                    raise TypeError("urls is not a list")
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                dropped.append((line_no, "malformed record: %s" % exc))
                continue
            domains: List[str] = []
            for url in urls:
                domain = normalize_url_domain(url, rules) if isinstance(url, str) else None
                if domain is None:
                    dropped.append((line_no, "malformed url %r" % (url,)))
                elif domain not in domains:
                    domains.append(domain)
            records.append(InterestPagesRecord(interest_id, domains))
    return records, dropped


def rank_domain_prevalence(records: Sequence[InterestPagesRecord]
                           ) -> List[Tuple[str, float]]:
    """Domains ordered by the fraction of interests mentioning them,
    descending; ties broken lexicographically."""
    if not records:
        raise DataError("cannot rank prevalence over zero records")
    counts: Dict[str, int] = {}
    for record in records:
        for domain in set(record.domains):
            counts[domain] = counts.get(domain, 0) + 1
    n = len(records)
    return sorted(((d, c / n) for d, c in counts.items()),
                  key=lambda item: (-item[1], item[0]))


def compute_page_skew(record: InterestPagesRecord, table: DomainBiasTable,
                      drop_top_k: int = 0,
                      prevalence: Optional[Sequence[Tuple[str, float]]] = None
                      ) -> PageSkewResult:
    """Unweighted mean of bias scores over the record's domains, after
    removing the ``drop_top_k`` globally most prevalent domains."""
    if drop_top_k < 0:
        raise ValueError("drop_top_k must be >= 0")
    if drop_top_k > 0 and prevalence is None:
        raise ValueError("drop_top_k > 0 requires a prevalence ranking")
    top = {d for d, _ in prevalence[:drop_top_k]} if drop_top_k else set()
    remaining = [d for d in record.domains if d not in top]
    scores = [table[d] for d in remaining if d in table]
    value = sum(scores) / len(scores) if scores else None
    return PageSkewResult(
        interest_id=record.interest_id,
        value=value,
        matched=len(scores),
        total=len(record.domains),
        dropped=len(record.domains) - len(remaining),
    )


def mention_coverage(records: Sequence[InterestPagesRecord],
                     table: DomainBiasTable) -> Tuple[float, float]:
    """(fraction of domain mentions with a bias score, fraction of unique
    domains with one).  Both are reported because they can differ a lot:
    missing domains tend to be unpopular ones."""
    mentions = matched_mentions = 0
    unique: Dict[str, bool] = {}
    for record in records:
        for domain in record.domains:
            mentions += 1
            hit = domain in table
            matched_mentions += hit
            unique[domain] = hit
    if mentions == 0:
        return 0.0, 0.0
    return (matched_mentions / mentions,
            sum(unique.values()) / len(unique) if unique else 0.0)


@dataclass
class PruningPoint:
    k: int
    coverage: float
    pearson_r: Optional[float]
    n_joint: int


def pruning_tradeoff_curve(records: Sequence[InterestPagesRecord],
                           table: DomainBiasTable,
                           voter_skews: Mapping[str, float],
                           k_range: Iterable[int]) -> List[PruningPoint]:
    """For each k: the fraction of interests still having a defined page
    skew, and the Pearson correlation between page skew and the
    voter-record skew over interests defined in both.

    ``voter_skews`` maps interest_id to a defined skew value.  Points
    with fewer than 3 jointly defined interests, or zero variance on
    either axis, get pearson_r None.
    """
    if not records:
        raise DataError("cannot compute a pruning curve over zero records")
    prevalence = rank_domain_prevalence(records)
    curve: List[PruningPoint] = []
    for k in k_range:
        results = [compute_page_skew(r, table, k, prevalence) for r in records]
        defined = [r for r in results if r.defined]
        coverage = len(defined) / len(records)
        xs = [r.value for r in defined if r.interest_id in voter_skews]
        ys = [voter_skews[r.interest_id] for r in defined if r.interest_id in voter_skews]
        r_value: Optional[float] = None
        if len(xs) >= 3 and len(set(xs)) > 1 and len(set(ys)) > 1:
            r_value = float(stats.pearsonr(xs, ys).statistic)
        curve.append(PruningPoint(k=k, coverage=coverage, pearson_r=r_value,
                                  n_joint=len(xs)))
    return curve
