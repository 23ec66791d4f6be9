"""Targeting-report payloads and their normalization into a dataset.

Reports arrive as daily snapshots of weekly aggregates: the same
(advertiser, week) window can be observed on several consecutive days
with growing totals.  Normalization deduplicates each window (latest
snapshot wins, spend basis is the maximum observed total, since totals
are cumulative within a window) and converts per-criterion budget
fractions into spend amounts.

Canonical payload schema (JSON):

    {"advertiser_id": str, "window_start": "YYYY-MM-DD",
     "window_end": "YYYY-MM-DD", "total_spend": dollars,
     "criteria": [{"name": str, "kind": str, "mode": "Include"|"Exclude",
                   "num_ads": int, "spend_fraction": float}, ...],
     "snapshot_date": "YYYY-MM-DD"}   # optional; fetcher date otherwise

Budget fractions are of the window total and routinely sum to more than
1 across criteria: one ad carries many criteria, so fractions overlap
rather than partition the budget.  Money is held as integer micro-dollars
internally.
"""

from __future__ import annotations

import datetime
import json
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .errors import DataError, PayloadError

log = logging.getLogger(__name__)

CRITERION_KINDS = ("Interest", "Demographic", "Behavior", "Age", "Gender",
                   "Location", "CustomAudience", "Lookalike")
MODES = ("Include", "Exclude")

WINDOW_DAYS = 7  # window_end = window_start + 6 days, inclusive

MICROS = 1_000_000


def dollars_to_micros(amount) -> int:
    return int(round(float(amount) * MICROS))


def micros_to_millions(micros: int) -> str:
    """Render micro-dollars in the report style, e.g. '6.6 M'."""
    return "%.1f M" % (micros / MICROS / 1e6)


@dataclass(frozen=True)
class TargetingCriterion:
    name: str
    kind: str
    mode: str
    num_ads: int
    spend_fraction: float

    def __post_init__(self):
        if not self.name:
            raise PayloadError("criterion name must be non-empty", field="name")
        if self.mode not in MODES:
            raise PayloadError("criterion mode %r not in %r" % (self.mode, MODES),
                               field="mode")
        if self.num_ads < 1:
            raise PayloadError("num_ads must be >= 1, got %r" % self.num_ads,
                               field="num_ads")
        if not 0.0 <= self.spend_fraction <= 1.0:
            raise PayloadError("spend_fraction %r outside [0, 1]" % self.spend_fraction,
                               field="spend_fraction")


@dataclass(frozen=True)
class TargetingReportSnapshot:
    advertiser_id: str
    snapshot_date: datetime.date
    window_start: datetime.date
    window_end: datetime.date
    total_spend_micros: int
    criteria: Tuple[TargetingCriterion, ...]

    def __post_init__(self):
        if (self.window_end - self.window_start).days != WINDOW_DAYS - 1:
            raise PayloadError(
                "window %s..%s is not %d days" % (self.window_start, self.window_end,
                                                  WINDOW_DAYS),
                field="window_end")
        if self.snapshot_date < self.window_end:
            raise PayloadError(
                "snapshot_date %s precedes window_end %s (reports lag reality)"
                % (self.snapshot_date, self.window_end),
                field="snapshot_date")
        if self.total_spend_micros < 0:
            raise PayloadError("total_spend must be >= 0", field="total_spend")

    @property
    def delay_days(self) -> int:
        return (self.snapshot_date - self.window_end).days


def _parse_date(value, field_name) -> datetime.date:
    try:
        return datetime.date.fromisoformat(str(value))
    except ValueError as exc:
        raise PayloadError("field %s: bad date %r" % (field_name, value),
                           field=field_name) from exc


def parse_targeting_report(raw, snapshot_date: Optional[datetime.date] = None
                           ) -> TargetingReportSnapshot:
    """Parse one canonical-schema payload (bytes, str, or dict).

    ``snapshot_date`` supplies the collection day when the payload does
    not carry its own (replay filename date, or the requested date on a
    live fetch).  Unknown criterion kinds are preserved opaquely with a
    warning; every other schema violation raises PayloadError naming the
    field.
    """
    if isinstance(raw, (bytes, str)):
        try:
            payload = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise PayloadError("payload is not valid JSON: %s" % exc) from exc
    else:
        payload = raw
    if not isinstance(payload, dict):
        raise PayloadError("payload is not a JSON object")

    for key in ("advertiser_id", "window_start", "window_end", "total_spend", "criteria"):
        if key not in payload:
            raise PayloadError("missing field %s" % key, field=key)

    advertiser_id = str(payload["advertiser_id"])
    if not advertiser_id:
        raise PayloadError("advertiser_id must be non-empty", field="advertiser_id")
    window_start = _parse_date(payload["window_start"], "window_start")
    window_end = _parse_date(payload["window_end"], "window_end")
    if "snapshot_date" in payload:
        snapshot_date = _parse_date(payload["snapshot_date"], "snapshot_date")
    if snapshot_date is None:
        raise PayloadError("no snapshot_date in payload and none supplied",
                           field="snapshot_date")
    try:
        total = dollars_to_micros(payload["total_spend"])
    except (TypeError, ValueError) as exc:
        raise PayloadError("field total_spend: %s" % exc, field="total_spend") from exc

    if not isinstance(payload["criteria"], list):
        raise PayloadError("criteria must be a list", field="criteria")
    criteria = []
    for i, entry in enumerate(payload["criteria"]):
        where = "criteria[%d]" % i
        if not isinstance(entry, dict):
            raise PayloadError("%s is not an object" % where, field=where)
        try:
            criterion = TargetingCriterion(
                name=str(entry["name"]),
                kind=str(entry["kind"]),
                mode=str(entry["mode"]),
                num_ads=int(entry["num_ads"]),
                spend_fraction=float(entry["spend_fraction"]),
            )
        except KeyError as exc:
            raise PayloadError("%s: missing field %s" % (where, exc),
                               field="%s.%s" % (where, exc.args[0]))
        except (TypeError, ValueError) as exc:
            raise PayloadError("%s: %s" % (where, exc), field=where) from exc
        except PayloadError as exc:
            raise PayloadError("%s: %s" % (where, exc),
                               field="%s.%s" % (where, exc.field)) from exc
        if criterion.kind not in CRITERION_KINDS:
            log.warning("advertiser %s: unknown criterion kind %r kept opaquely",
                        advertiser_id, criterion.kind)
        criteria.append(criterion)

    return TargetingReportSnapshot(
        advertiser_id=advertiser_id,
        snapshot_date=snapshot_date,
        window_start=window_start,
        window_end=window_end,
        total_spend_micros=total,
        criteria=tuple(criteria),
    )


@dataclass(frozen=True)
class NormalizedCriterion:
    name: str
    kind: str
    mode: str
    num_ads: int
    spend_micros: int


@dataclass(frozen=True)
class WindowAggregate:
    """One deduplicated (advertiser, window) with normalized spends."""

    advertiser_id: str
    window_start: datetime.date
    window_end: datetime.date
    snapshot_date: datetime.date
    total_spend_micros: int
    criteria: Tuple[NormalizedCriterion, ...]

    @property
    def delay_days(self) -> int:
        return (self.snapshot_date - self.window_end).days


@dataclass(frozen=True)
class CollectionStats:
    """Per-request bookkeeping from the fetch stage; the dataset cannot
    reconstruct these from snapshots alone."""

    requests: int = 0
    missing: int = 0
    transport_failures: int = 0
    parse_failures: int = 0
    retries: int = 0

    @property
    def missing_rate(self) -> float:
        return self.missing / self.requests if self.requests else 0.0


@dataclass
class TargetingDataset:
    windows: Dict[Tuple[str, datetime.date, datetime.date], WindowAggregate] = field(default_factory=dict)
    delay_histogram: Dict[int, int] = field(default_factory=dict)
    collection: Optional[CollectionStats] = None

    def advertisers(self) -> List[str]:
        return sorted({w.advertiser_id for w in self.windows.values()})

    def usages(self) -> Iterable[Tuple[str, NormalizedCriterion]]:
        """Every (advertiser_id, normalized criterion) occurrence, over
        all deduplicated windows."""
        for key in sorted(self.windows):
            window = self.windows[key]
            for criterion in window.criteria:
                yield window.advertiser_id, criterion

    def spend_by_criterion(self, mode: str, kinds: Optional[Sequence[str]] = None,
                           advertisers: Optional[set] = None) -> Dict[str, int]:
        """Total spend per criterion name for one mode, optionally
        restricted to given kinds and advertiser ids."""
        spends: Dict[str, int] = {}
        for advertiser_id, criterion in self.usages():
            if criterion.mode != mode:
                continue
            if kinds is not None and criterion.kind not in kinds:
                continue
            if advertisers is not None and advertiser_id not in advertisers:
                continue
            spends[criterion.name] = spends.get(criterion.name, 0) + criterion.spend_micros
        return spends


def normalize_snapshots(snapshots: Iterable[TargetingReportSnapshot],
                        collection: Optional[CollectionStats] = None
                        ) -> TargetingDataset:
    """Deduplicate overlapping daily snapshots into one record per
    (advertiser, window).

    The latest snapshot supplies the criteria; the spend basis is the
    maximum total observed for the window (totals are cumulative within
    a window, so a later-but-smaller total draws a warning and the
    maximum is kept).  Per-criterion spend = spend_fraction x basis.
    The delay histogram is computed over the kept snapshots, which keeps
    normalization exactly idempotent under re-export.
    """
    grouped: Dict[Tuple[str, datetime.date, datetime.date], List[TargetingReportSnapshot]] = {}
    for snap in snapshots:
        key = (snap.advertiser_id, snap.window_start, snap.window_end)
        grouped.setdefault(key, []).append(snap)

    dataset = TargetingDataset(collection=collection)
    for key in sorted(grouped):
        observations = grouped[key]
        latest = max(observations, key=lambda s: (s.snapshot_date, s.total_spend_micros))
        basis = max(s.total_spend_micros for s in observations)
        if latest.total_spend_micros < basis:
            log.warning("advertiser %s window %s: latest snapshot total %d below "
                        "earlier maximum %d; keeping the maximum",
                        latest.advertiser_id, latest.window_start,
                        latest.total_spend_micros, basis)
        criteria = tuple(
            NormalizedCriterion(
                name=c.name, kind=c.kind, mode=c.mode, num_ads=c.num_ads,
                spend_micros=int(round(c.spend_fraction * basis)),
            )
            for c in latest.criteria
        )
        window = WindowAggregate(
            advertiser_id=latest.advertiser_id,
            window_start=latest.window_start,
            window_end=latest.window_end,
            snapshot_date=latest.snapshot_date,
            total_spend_micros=basis,
            criteria=criteria,
        )
        dataset.windows[key] = window
        dataset.delay_histogram[window.delay_days] = \
            dataset.delay_histogram.get(window.delay_days, 0) + 1
    return dataset


def dataset_to_snapshots(dataset: TargetingDataset) -> List[TargetingReportSnapshot]:
    """Re-express a normalized dataset as snapshots; feeding these back
    through normalize_snapshots reproduces the dataset exactly."""
    out: List[TargetingReportSnapshot] = []
    for key in sorted(dataset.windows):
        window = dataset.windows[key]
        criteria = tuple(
            TargetingCriterion(
                name=c.name, kind=c.kind, mode=c.mode, num_ads=c.num_ads,
                spend_fraction=(c.spend_micros / window.total_spend_micros
                                if window.total_spend_micros else 0.0),
            )
            for c in window.criteria
        )
        out.append(TargetingReportSnapshot(
            advertiser_id=window.advertiser_id,
            snapshot_date=window.snapshot_date,
            window_start=window.window_start,
            window_end=window.window_end,
            total_spend_micros=window.total_spend_micros,
            criteria=criteria,
        ))
    return out


@dataclass
class DatasetStats:
    advertiser_count: int
    window_count: int
    unique_by_kind: Dict[str, int]
    unique_included_by_kind: Dict[str, int]
    unique_excluded_by_kind: Dict[str, int]
    inclusion_usages: int
    exclusion_usages: int
    missing_rate: float
    delay_histogram: Dict[int, int]


def dataset_stats(dataset: TargetingDataset) -> DatasetStats:
    """Exact summary counts with stable (sorted) ordering."""
    by_kind: Dict[str, set] = {}
    by_kind_mode: Dict[str, Dict[str, set]] = {"Include": {}, "Exclude": {}}
    inclusion = exclusion = 0
    for _advertiser, criterion in dataset.usages():
        by_kind.setdefault(criterion.kind, set()).add(criterion.name)
        by_kind_mode[criterion.mode].setdefault(criterion.kind, set()).add(criterion.name)
        if criterion.mode == "Include":
            inclusion += 1
        else:
            exclusion += 1
    return DatasetStats(
        advertiser_count=len(dataset.advertisers()),
        window_count=len(dataset.windows),
        unique_by_kind={k: len(v) for k, v in sorted(by_kind.items())},
        unique_included_by_kind={k: len(v) for k, v in sorted(by_kind_mode["Include"].items())},
        unique_excluded_by_kind={k: len(v) for k, v in sorted(by_kind_mode["Exclude"].items())},
        inclusion_usages=inclusion,
        exclusion_usages=exclusion,
        missing_rate=dataset.collection.missing_rate if dataset.collection else 0.0,
        delay_histogram=dict(sorted(dataset.delay_histogram.items())),
    )


# ---------------------------------------------------------------------------
# JSON persistence for the CLI pipeline
# ---------------------------------------------------------------------------

def dataset_to_json(dataset: TargetingDataset, destination) -> None:
    windows = []
    for key in sorted(dataset.windows):
        w = dataset.windows[key]
        windows.append({
            "advertiser_id": w.advertiser_id,
            "window_start": w.window_start.isoformat(),
            "window_end": w.window_end.isoformat(),
            "snapshot_date": w.snapshot_date.isoformat(),
            "total_spend_micros": w.total_spend_micros,
            "criteria": [
                {"name": c.name, "kind": c.kind, "mode": c.mode,
                 "num_ads": c.num_ads, "spend_micros": c.spend_micros}
                for c in w.criteria
            ],
        })
    payload = {
        "windows": windows,
        "delay_histogram": {str(k): v for k, v in sorted(dataset.delay_histogram.items())},
        "collection": None if dataset.collection is None else {
            "requests": dataset.collection.requests,
            "missing": dataset.collection.missing,
            "transport_failures": dataset.collection.transport_failures,
            "parse_failures": dataset.collection.parse_failures,
            "retries": dataset.collection.retries,
        },
    }
    with open(destination, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")


def dataset_from_json(source) -> TargetingDataset:
    try:
        with open(source, encoding="utf-8") as fh:
            payload = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError("cannot read dataset %s: %s" % (source, exc)) from exc
    dataset = TargetingDataset()
    for entry in payload["windows"]:
        window = WindowAggregate(
            advertiser_id=entry["advertiser_id"],
            window_start=datetime.date.fromisoformat(entry["window_start"]),
            window_end=datetime.date.fromisoformat(entry["window_end"]),
            snapshot_date=datetime.date.fromisoformat(entry["snapshot_date"]),
            total_spend_micros=int(entry["total_spend_micros"]),
            criteria=tuple(
                NormalizedCriterion(c["name"], c["kind"], c["mode"],
                                    int(c["num_ads"]), int(c["spend_micros"]))
                for c in entry["criteria"]
            ),
        )
        dataset.windows[(window.advertiser_id, window.window_start, window.window_end)] = window
    dataset.delay_histogram = {int(k): int(v)
                               for k, v in payload.get("delay_histogram", {}).items()}
    if payload.get("collection"):
        dataset.collection = CollectionStats(**payload["collection"])
    return dataset
