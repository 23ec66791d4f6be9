"""Joins of targeting data, advertiser affiliations, and skew tables.

Everything here answers one family of questions: do advertisers on each
side of the spectrum use, and spend on, interests whose audiences skew
their way?  Only advertisers with an affiliation label participate in
the partisan analyses; a spend skew of 0 therefore means "even among the
labeled accounts", not "even overall".
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Set, Tuple

import numpy as np
from scipy import optimize, special, stats

from .adlib import TargetingDataset
from .errors import DataError, FitError
from .skew import Leaning, SkewScore, SkewThresholds, classify_tertile

log = logging.getLogger(__name__)

CONSERVATIVES = "Conservatives"
PROGRESSIVES = "Progressives"
OTHER_GROUP = "Other"

# Raw label -> collapsed group.
LABEL_GROUPS = {
    "GOP": CONSERVATIVES,
    "R-PACs": CONSERVATIVES,
    "Conservative": CONSERVATIVES,
    "Dems": PROGRESSIVES,
    "D-PACs": PROGRESSIVES,
    "Progressive": PROGRESSIVES,
    "Non": OTHER_GROUP,
    "Other": OTHER_GROUP,
    "Independent": OTHER_GROUP,
}

# Criterion names flagged as overtly politics-related in reports.
DEFAULT_POLITICAL_NAMES = ("Politics", "Voting", "Election")


@dataclass(frozen=True)
class AffiliationRecord:
    advertiser_id: str
    raw_label: str
    group: str


def load_affiliations(source) -> Tuple[Dict[str, AffiliationRecord], List[Tuple[int, str]]]:
    """Read ``advertiser_id,raw_label`` rows and collapse the nine raw
    labels into three groups; unknown labels are rejected with a report."""
    records: Dict[str, AffiliationRecord] = {}
    rejected: List[Tuple[int, str]] = []
    try:
        fh = open(source, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError("cannot read affiliations %s: %s" % (source, exc)) from exc
    with fh:
        reader = csv.reader(fh)
        for line_no, row in enumerate(reader, start=1):
            if not row or (line_no == 1 and row == ["advertiser_id", "raw_label"]):
                continue
            if len(row) != 2:
                rejected.append((line_no, "expected 2 columns, got %d" % len(row)))
                continue
            advertiser_id, raw_label = row[0].strip(), row[1].strip()
            if not advertiser_id:
                rejected.append((line_no, "empty advertiser_id"))
                continue
            if raw_label not in LABEL_GROUPS:
                rejected.append((line_no, "unknown label %r" % raw_label))
                continue
            if advertiser_id in records:
                log.warning("duplicate affiliation for %s at line %d; keeping last",
                            advertiser_id, line_no)
            records[advertiser_id] = AffiliationRecord(advertiser_id, raw_label,
                                                       LABEL_GROUPS[raw_label])
    return records, rejected


def leanings_from_scores(scores: Mapping[str, SkewScore],
                         thresholds: SkewThresholds) -> Dict[str, Leaning]:
    return {interest: classify_tertile(score, thresholds)
            for interest, score in scores.items()}


@dataclass
class UsageShares:
    """Interest-use fractions per group over (mode x leaning) cells.

    The unit of counting is one (advertiser, interest, mode) usage
    record.  Fractions within a group sum to 1 over the classified
    cells; usages whose interest has no available leaning are excluded
    from the fractions and counted in ``unavailable``.
    """

    fractions: Dict[str, Dict[Tuple[str, str], float]]
    counts: Dict[str, Dict[Tuple[str, str], int]]
    unavailable: Dict[str, int]


def usage_shares(dataset: TargetingDataset,
                 affiliations: Mapping[str, AffiliationRecord],
                 leanings: Mapping[str, Leaning],
                 groups: Sequence[str] = (CONSERVATIVES, PROGRESSIVES)) -> UsageShares:
    """Fraction of each group's interest usages falling into each
    (mode, leaning) cell."""
    counts: Dict[str, Dict[Tuple[str, str], int]] = {g: {} for g in groups}
    unavailable: Dict[str, int] = {g: 0 for g in groups}
    labeled_seen = False
    usage_keys: Set[Tuple[str, str, str]] = set()
    for advertiser_id, criterion in dataset.usages():
        record = affiliations.get(advertiser_id)
        if record is None or record.group not in counts:
            continue
        labeled_seen = True
        if criterion.kind != "Interest":
            continue
        usage_key = (advertiser_id, criterion.name, criterion.mode)
        if usage_key in usage_keys:
            continue
        usage_keys.add(usage_key)
        leaning = leanings.get(criterion.name, Leaning.UNAVAILABLE)
        if leaning is Leaning.UNAVAILABLE:
            unavailable[record.group] += 1
            continue
        cell = (criterion.mode, leaning.value)
        counts[record.group][cell] = counts[record.group].get(cell, 0) + 1
    if not labeled_seen:
        raise DataError("no labeled advertisers appear in the dataset")
    fractions: Dict[str, Dict[Tuple[str, str], float]] = {}
    for group, cells in counts.items():
        total = sum(cells.values())
        fractions[group] = {cell: n / total for cell, n in cells.items()} if total else {}
    return UsageShares(fractions=fractions, counts=counts, unavailable=unavailable)


@dataclass
class SpendDistribution:
    """Sorted per-interest spends for one (group, mode) selection, plus
    the usual summary points.  Spends are micro-dollars."""

    group: str
    mode: str
    spends: List[int]
    median: float
    mean: float

    @property
    def count(self) -> int:
        return len(self.spends)


def spend_distribution(dataset: TargetingDataset,
                       affiliations: Mapping[str, AffiliationRecord],
                       group: str, mode: str,
                       interests: Optional[Set[str]] = None) -> SpendDistribution:
    """Distribution of per-interest spend by one group in one mode,
    optionally restricted to a subset of interests (e.g. one leaning)."""
    members = {a for a, r in affiliations.items() if r.group == group}
    spends_by_interest = dataset.spend_by_criterion(mode, kinds=("Interest",),
                                                    advertisers=members)
    if interests is not None:
        spends_by_interest = {k: v for k, v in spends_by_interest.items() if k in interests}
    spends = sorted(spends_by_interest.values())
    if not spends:
        raise DataError("no %s interests for group %s in mode %s"
                        % ("selected" if interests is not None else "used", group, mode))
    return SpendDistribution(
        group=group, mode=mode, spends=spends,
        median=float(np.median(spends)),
        mean=float(np.mean(spends)),
    )


@dataclass(frozen=True)
class SpendSkewPoint:
    interest_id: str
    audience_skew: float
    spend_skew: float
    mode: str
    spend_r: int
    spend_d: int


def compute_spend_skew_points(dataset: TargetingDataset,
                              affiliations: Mapping[str, AffiliationRecord],
                              skews: Mapping[str, SkewScore],
                              mode: str) -> List[SpendSkewPoint]:
    """One point per interest with a defined audience skew and nonzero
    labeled spend: (R spend - D spend) / (R spend + D spend) against the
    audience skew.  Unlabeled advertisers' spend is excluded."""
    conservative = {a for a, r in affiliations.items() if r.group == CONSERVATIVES}
    progressive = {a for a, r in affiliations.items() if r.group == PROGRESSIVES}
    spend_r = dataset.spend_by_criterion(mode, kinds=("Interest",), advertisers=conservative)
    spend_d = dataset.spend_by_criterion(mode, kinds=("Interest",), advertisers=progressive)
    points: List[SpendSkewPoint] = []
    for interest in sorted(set(spend_r) | set(spend_d)):
        score = skews.get(interest)
        if score is None or score.value is None:
            continue
        r, d = spend_r.get(interest, 0), spend_d.get(interest, 0)
        if r + d <= 0:
            continue
        points.append(SpendSkewPoint(
            interest_id=interest,
            audience_skew=score.value,
            spend_skew=(r - d) / (r + d),
            mode=mode,
            spend_r=r,
            spend_d=d,
        ))
    return points


@dataclass(frozen=True)
class FitResult:
    intercept: float
    coefficient: float
    r_squared: float
    n_points: int


def sigmoid_response(x, intercept, coefficient):
    """The fitted response y = 2*sigmoid(a + b*x) - 1, mapping the real
    line onto (-1, 1)."""
    return 2.0 * special.expit(intercept + coefficient * np.asarray(x, dtype=float)) - 1.0


def fit_spend_vs_audience_skew(points: Sequence[SpendSkewPoint],
                               max_iterations: int = 2000) -> FitResult:
    """Least-squares fit of spend skew as a sigmoid in audience skew.

    Deterministic: fixed starting points, analytic Jacobian, fixed
    tolerances; the best of a small set of starts is kept.  R-squared is
    1 - SSR/SST on the fitted scale (0 when the response has no
    variance), clamped to [0, 1].
    """
    if len(points) < 10:
        raise DataError("need at least 10 points to fit, got %d" % len(points))
    x = np.array([p.audience_skew for p in points], dtype=float)
    y = np.array([p.spend_skew for p in points], dtype=float)

    def residuals(theta):
        return sigmoid_response(x, theta[0], theta[1]) - y

    def jacobian(theta):
        s = special.expit(theta[0] + theta[1] * x)
        d = 2.0 * s * (1.0 - s)
        return np.column_stack([d, d * x])

    best = None
    diagnostics = {}
    for start in ([0.0, 0.0], [0.0, 4.0], [0.0, -4.0]):
        result = optimize.least_squares(residuals, start, jac=jacobian,
                                        method="lm", max_nfev=max_iterations)
        ssr = float(2.0 * result.cost)
        diagnostics[tuple(start)] = {"status": result.status, "ssr": ssr}
        if result.status > 0 and (best is None or ssr < best[0]):
            best = (ssr, result)
    if best is None:
        raises = optimize.least_squares(residuals, [0.0, 0.0], jac=jacobian,
                                        method="lm", max_nfev=max_iterations)
        raise FitError("sigmoid fit did not converge within %d evaluations" % max_iterations,
                       best_params=list(raises.x), diagnostics=diagnostics)
    ssr, result = best
    sst = float(np.sum((y - y.mean()) ** 2))
    r_squared = 0.0 if sst == 0.0 else max(0.0, min(1.0, 1.0 - ssr / sst))
    return FitResult(intercept=float(result.x[0]), coefficient=float(result.x[1]),
                     r_squared=r_squared, n_points=len(points))


@dataclass
class CoverageCorrelation:
    pair: str
    pearson_r: Optional[float]
    points: List[Tuple[str, float, float]]  # (interest, coverage_a, coverage_b)


def coverage_correlation(matrix, pair: str) -> CoverageCorrelation:
    """Pearson correlation of interests' coverage fractions between the
    two audiences of a pair; the scatter series is kept for plotting."""
    from .skew import PAIR_AUDIENCES

    label_a, label_b = PAIR_AUDIENCES[pair]
    points: List[Tuple[str, float, float]] = []
    for interest in matrix.interests:
        cov_a = matrix.coverage(label_a, interest)
        cov_b = matrix.coverage(label_b, interest)
        if cov_a is None or cov_b is None:
            continue
        points.append((interest, cov_a, cov_b))
    if len(points) < 3:
        raise DataError("pair %s: need >= 3 interests with coverage in both "
                        "audiences, got %d" % (pair, len(points)))
    xs = [p[1] for p in points]
    ys = [p[2] for p in points]
    r: Optional[float] = None
    if len(set(xs)) > 1 and len(set(ys)) > 1:
        r = float(stats.pearsonr(xs, ys).statistic)
    return CoverageCorrelation(pair=pair, pearson_r=r, points=points)


@dataclass
class TopSpendRow:
    interest: str
    exclusion_spend_micros: int
    inclusion_spend_micros: int
    political: bool
    skews: Dict[str, Optional[float]]  # pair -> value, None rendered "-"
    leaning: Optional[str] = None

    @property
    def total_micros(self) -> int:
        return self.exclusion_spend_micros + self.inclusion_spend_micros


def top_spend_table(dataset: TargetingDataset,
                    skews: Mapping[str, Mapping[str, SkewScore]],
                    n: int,
                    leanings: Optional[Mapping[str, Leaning]] = None,
                    political_names: Sequence[str] = DEFAULT_POLITICAL_NAMES,
                    pairs: Sequence[str] = ("RD", "WB", "WH", "BH")) -> List[TopSpendRow]:
    """Top-n interests by total (inclusion + exclusion) spend across all
    advertisers, with per-pair skews; undefined or unreliable skews render
    as "-".  Ties in spend break lexicographically by interest name."""
    if n < 1:
        raise ValueError("n must be >= 1")
    include = dataset.spend_by_criterion("Include", kinds=("Interest",))
    exclude = dataset.spend_by_criterion("Exclude", kinds=("Interest",))
    political = set(political_names)
    rows: List[TopSpendRow] = []
    for interest in set(include) | set(exclude):
        per_pair: Dict[str, Optional[float]] = {}
        for pair in pairs:
            score = skews.get(interest, {}).get(pair)
            usable = score is not None and score.value is not None and score.reliable
            per_pair[pair] = score.value if usable else None
        leaning = leanings.get(interest) if leanings else None
        rows.append(TopSpendRow(
            interest=interest,
            exclusion_spend_micros=exclude.get(interest, 0),
            inclusion_spend_micros=include.get(interest, 0),
            political=interest in political,
            skews=per_pair,
            leaning=leaning.value if leaning else None,
        ))
    rows.sort(key=lambda row: (-row.total_micros, row.interest))
    return rows[:n]
