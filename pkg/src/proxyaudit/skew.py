"""Audience-skew statistic, tertile classification, and skew tables.

The statistic compares how popular an interest is in two disjoint audiences
A and B.  With p_G = (interest-restricted count in G) / (total count in G):

    value = (p_A - p_B) / (p_A + p_B)

It ranges from -1 (only audience B holds the interest) to +1 (only A does)
and is 0 when both audiences hold it at the same rate.  When neither
audience holds the interest at all the statistic is undefined, which is
deliberately distinct from 0: zero asserts balance, absence asserts nothing.
"""

from __future__ import annotations

import csv
import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .errors import ConfigError, DataError

log = logging.getLogger(__name__)

# Audience pair -> (group A label, group B label).  Positive skew leans
# toward the first label of the pair.
PAIR_AUDIENCES = {
    "RD": ("REP", "DEM"),
    "WB": ("WHITE", "BLACK"),
    "WH": ("WHITE", "HISPANIC"),
    "BH": ("BLACK", "HISPANIC"),
}

# Below the floor, interest-restricted counts are too small for the ratio to
# mean much; scores are kept but flagged unreliable and rendered "-".
DEFAULT_MIN_RELIABLE_COUNT = 50


class Leaning(enum.Enum):
    DEMOCRATIC_SKEW = "DemocraticSkew"
    NEUTRAL = "Neutral"
    REPUBLICAN_SKEW = "RepublicanSkew"
    UNAVAILABLE = "Unavailable"


@dataclass(frozen=True)
class SkewScore:
    """One evaluated skew statistic with its supporting counts.

    ``value`` is None when the statistic is undefined (both coverage
    fractions zero, or an estimate failed; ``reason`` says which).
    ``reliable`` is False when min(n_a_i, n_b_i) fell below the
    small-count floor in effect when the score was computed.
    """

    value: Optional[float]
    pair: str
    n_a_i: int
    n_a: int
    n_b_i: int
    n_b: int
    reliable: bool = True
    reason: Optional[str] = None

    @property
    def defined(self) -> bool:
        return self.value is not None


@dataclass(frozen=True)
class SkewThresholds:
    """Tertile cut points on the Republican-Democratic skew axis.

    Values below ``democratic_below`` classify as Democratic-skewing,
    values at or above ``republican_at_or_above`` as Republican-skewing,
    anything between as Neutral.  ``degenerate`` marks thresholds derived
    from a corpus with no spread (all scores equal).
    """

    democratic_below: float
    republican_at_or_above: float
    degenerate: bool = False

    def __post_init__(self):
        if not self.degenerate and not self.democratic_below < self.republican_at_or_above:
            raise ConfigError(
                "democratic_below (%r) must be < republican_at_or_above (%r)"
                % (self.democratic_below, self.republican_at_or_above)
            )


# Cut points observed on a reference corpus of ~19K targeting interests.
# Derive corpus-specific ones with derive_tertile_thresholds().
DEFAULT_TERTILE_THRESHOLDS = SkewThresholds(-0.073, 0.063)


def compute_skew(n_a_i, n_a, n_b_i, n_b, pair="RD",
                 min_reliable_count=DEFAULT_MIN_RELIABLE_COUNT) -> SkewScore:
    """Evaluate the skew statistic from four counts.

    Uses the cross-multiplied form
    (n_a_i*n_b - n_b_i*n_a) / (n_a_i*n_b + n_b_i*n_a), which is
    algebraically identical to (p_A-p_B)/(p_A+p_B) but, for integer
    counts, involves a single correctly-rounded division.  That makes the
    result exactly antisymmetric under swapping (A, B) and exactly
    invariant under integer scaling of either group's counts.
    """
    if n_a <= 0 or n_b <= 0:
        raise ValueError("audience totals must be positive (n_a=%r, n_b=%r)" % (n_a, n_b))
    if n_a_i < 0 or n_b_i < 0:
        raise ValueError("interest counts must be non-negative")
    if n_a_i > n_a or n_b_i > n_b:
        raise ValueError(
            "interest counts cannot exceed audience totals "
            "(n_a_i=%r > n_a=%r or n_b_i=%r > n_b=%r)" % (n_a_i, n_a, n_b_i, n_b)
        )

    reliable = min(n_a_i, n_b_i) >= min_reliable_count
    numerator = n_a_i * n_b - n_b_i * n_a
    denominator = n_a_i * n_b + n_b_i * n_a
    if denominator == 0:
        return SkewScore(None, pair, n_a_i, n_a, n_b_i, n_b,
                         reliable=reliable, reason="no coverage in either audience")
    return SkewScore(numerator / denominator, pair, n_a_i, n_a, n_b_i, n_b,
                     reliable=reliable)


def skew_table(matrix, pairs: Sequence[str] = ("RD", "WB", "WH", "BH"),
               min_reliable_count=DEFAULT_MIN_RELIABLE_COUNT) -> dict:
    """Compute one SkewScore per (interest, pair) over an estimate matrix.

    ``matrix`` is a reach.EstimateMatrix.  Every audience named by a
    requested pair must have a successful total estimate; that is a
    configuration error, not a per-cell condition.  Cells whose estimates
    failed yield undefined scores carrying the failure reason.

    Returns {interest_id: {pair: SkewScore}}.
    """
    for pair in pairs:
        if pair not in PAIR_AUDIENCES:
            raise ConfigError("unknown audience pair %r" % pair)
        for label in PAIR_AUDIENCES[pair]:
            if label not in matrix.totals:
                raise ConfigError(
                    "matrix is missing a total estimate for audience %r (pair %s)"
                    % (label, pair)
                )

    table: dict = {}
    for interest in matrix.interests:
        per_pair = {}
        for pair in pairs:
            label_a, label_b = PAIR_AUDIENCES[pair]
            err = matrix.errors.get((label_a, interest)) or matrix.errors.get((label_b, interest))
            if err is not None:
                per_pair[pair] = SkewScore(None, pair, 0, matrix.totals[label_a],
                                           0, matrix.totals[label_b],
                                           reliable=False,
                                           reason="estimate failed: %s" % err)
                continue
            per_pair[pair] = compute_skew(
                matrix.cells[(label_a, interest)], matrix.totals[label_a],
                matrix.cells[(label_b, interest)], matrix.totals[label_b],
                pair=pair, min_reliable_count=min_reliable_count,
            )
        table[interest] = per_pair
    return table


def classify_tertile(score: SkewScore, thresholds: SkewThresholds) -> Leaning:
    """Assign a leaning. The Republican boundary is inclusive (>=), the
    Democratic one exclusive (<); undefined or unreliable scores are
    Unavailable."""
    if score.value is None or not score.reliable:
        return Leaning.UNAVAILABLE
    if score.value < thresholds.democratic_below:
        return Leaning.DEMOCRATIC_SKEW
    if score.value >= thresholds.republican_at_or_above:
        return Leaning.REPUBLICAN_SKEW
    return Leaning.NEUTRAL


def derive_tertile_thresholds(scores: Iterable[SkewScore]) -> SkewThresholds:
    """Split the defined scores into three equally sized groups.

    Returns the 1/3 and 2/3 quantiles (linear interpolation) of the
    defined values.  Needs at least 3 defined scores.  When all defined
    values coincide the thresholds are degenerate and flagged.
    """
    import numpy as np

    values = sorted(s.value for s in scores if s.value is not None)
    if len(values) < 3:
        raise DataError("need at least 3 defined scores to derive tertiles, got %d" % len(values))
    lo, hi = np.quantile(values, [1.0 / 3.0, 2.0 / 3.0], method="linear")
    if not lo < hi:
        log.warning("degenerate tertile thresholds: all defined scores near %r", lo)
        return SkewThresholds(float(lo), float(hi), degenerate=True)
    return SkewThresholds(float(lo), float(hi))


@dataclass
class SkewHistogram:
    """Binned skew counts per pair over [-1, 1]; undefined scores are
    excluded from the bins and counted separately."""

    bin_width: float
    edges: list
    counts: dict          # pair -> list of bin counts
    undefined: dict       # pair -> count of undefined scores
    total_defined: dict = field(default_factory=dict)


def skew_histogram(scores: Iterable[SkewScore], bin_width: float) -> SkewHistogram:
    if bin_width <= 0:
        raise ValueError("bin_width must be positive")
    n_bins = int(math.ceil(2.0 / bin_width - 1e-9))
    edges = [-1.0 + i * bin_width for i in range(n_bins)] + [1.0]
    counts: dict = {}
    undefined: dict = {}
    total: dict = {}
    for score in scores:
        counts.setdefault(score.pair, [0] * n_bins)
        undefined.setdefault(score.pair, 0)
        total.setdefault(score.pair, 0)
        if score.value is None:
            undefined[score.pair] += 1
            continue
        q = (score.value + 1.0) / bin_width
        # Snap values sitting within 1e-9 (relative) of a bin edge onto it,
        # so e.g. 0.40 lands in [0.4, 0.5) despite binary rounding.
        idx = int(math.floor(q + 1e-9 * (abs(q) + 1.0)))
        idx = min(max(idx, 0), n_bins - 1)
        counts[score.pair][idx] += 1
        total[score.pair] += 1
    return SkewHistogram(bin_width, edges, counts, undefined, total)


# ---------------------------------------------------------------------------
# Table export: interest_id,interest_name,pair,value,reliable,n_a_i,n_a,n_b_i,n_b
# ---------------------------------------------------------------------------

SKEW_TABLE_HEADER = ["interest_id", "interest_name", "pair", "value",
                     "reliable", "n_a_i", "n_a", "n_b_i", "n_b"]


def write_skew_table(table: Mapping[str, Mapping[str, SkewScore]], destination,
                     names: Optional[Mapping[str, str]] = None) -> int:
    """Write the delimited skew-table format; ``value`` is empty for
    undefined scores.  Returns the number of rows written."""
    names = names or {}
    rows = 0
    with open(destination, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(SKEW_TABLE_HEADER)
        for interest in sorted(table):
            for pair in table[interest]:
                s = table[interest][pair]
                writer.writerow([
                    interest,
                    names.get(interest, interest),
                    pair,
                    "" if s.value is None else repr(s.value),
                    "true" if s.reliable else "false",
                    s.n_a_i, s.n_a, s.n_b_i, s.n_b,
                ])
                rows += 1
    return rows


def read_skew_table(source) -> dict:
    """Inverse of write_skew_table: {interest_id: {pair: SkewScore}}."""
    table: dict = {}
    with open(source, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != SKEW_TABLE_HEADER:
            raise DataError("unexpected skew-table header in %s: %r" % (source, header))
        for row in reader:
            interest, _name, pair, value, reliable, n_a_i, n_a, n_b_i, n_b = row
            score = SkewScore(
                None if value == "" else float(value),
                pair, int(n_a_i), int(n_a), int(n_b_i), int(n_b),
                reliable=(reliable == "true"),
            )
            table.setdefault(interest, {})[pair] = score
    return table
