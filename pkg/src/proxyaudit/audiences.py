"""Voter-record ingestion and uniform audience construction.

Audiences are built by sampling voter records uniformly (without
replacement) from the pool matching one party or race label.  Pairs of
audiences fed to the skew statistic must be disjoint; verify_disjoint
checks that explicitly.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np

from .errors import DataError
from .synthworld import PARTIES, RACES, SELF_REPORT_STATES

log = logging.getLogger(__name__)

VOTER_FILE_HEADER = ["voter_id", "state", "party", "race"]

AUDIENCE_LABELS = ("REP", "DEM", "OTH") + RACES


@dataclass(frozen=True)
class VoterRecord:
    voter_id: str
    state: str
    party: str
    race: str


@dataclass
class RejectReport:
    """Per-line rejection log from a voter-file load."""

    rejected: List[Tuple[int, str]] = field(default_factory=list)
    accepted_count: int = 0

    def add(self, line_no: int, reason: str):
        self.rejected.append((line_no, reason))

    @property
    def rejected_count(self) -> int:
        return len(self.rejected)


@dataclass
class AudienceSpec:
    """A uniform audience: the sampled member ids plus how it was drawn.

    ``shortfall`` is True when the eligible pool was smaller than the
    requested size, in which case the spec contains the whole pool.
    """

    label: str
    member_ids: Set[str]
    sample_seed: int
    requested_size: int
    shortfall: bool = False

    def __len__(self):
        return len(self.member_ids)


def load_voter_records(source, allow_states: Sequence[str] = SELF_REPORT_STATES
                       ) -> Tuple[List[VoterRecord], RejectReport]:
    """Read a voter-record file, rejecting malformed rows with reasons.

    Raises DataError when the file is unreadable, lacks the expected
    header, or rejects more than half of its data rows (format mismatch).
    """
    allow = set(allow_states)
    records: List[VoterRecord] = []
    report = RejectReport()
    seen_ids: Set[str] = set()
    try:
        fh = open(source, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError("cannot read voter file %s: %s" % (source, exc)) from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != VOTER_FILE_HEADER:
            raise DataError("voter file %s has unexpected header %r" % (source, header))
        for line_no, row in enumerate(reader, start=2):
            if len(row) != 4:
                report.add(line_no, "expected 4 columns, got %d" % len(row))
                continue
            voter_id, state, party, race = (c.strip() for c in row)
            if not voter_id:
                report.add(line_no, "empty voter_id")
                continue
            if voter_id in seen_ids:
                report.add(line_no, "duplicate voter_id %s" % voter_id)
                continue
            if state not in allow:
                report.add(line_no, "state %r not in allow-list" % state)
                continue
            if party not in PARTIES:
                report.add(line_no, "unknown party %r" % party)
                continue
            if race not in RACES:
                report.add(line_no, "unknown race %r" % race)
                continue
            seen_ids.add(voter_id)
            records.append(VoterRecord(voter_id, state, party, race))
    report.accepted_count = len(records)
    total = report.accepted_count + report.rejected_count
    if total > 0 and report.rejected_count * 2 > total:
        raise DataError(
            "format mismatch in %s: %d of %d rows rejected"
            % (source, report.rejected_count, total))
    return records, report


def selector_for_label(label: str):
    """Predicate selecting records matching a party or race label."""
    if label in PARTIES:
        return lambda r: r.party == label
    if label in RACES:
        return lambda r: r.race == label
    raise DataError("unknown audience label %r" % label)


def build_uniform_audience(records: Iterable[VoterRecord], selector,
                           requested_size: int, seed: int,
                           label: Optional[str] = None) -> AudienceSpec:
    """Sample a uniform audience without replacement.

    ``selector`` is a label string or a predicate over VoterRecord.  When
    the eligible pool is smaller than ``requested_size`` the whole pool
    is returned with the shortfall flagged.  Deterministic for a fixed
    seed (the pool is sorted by voter_id before sampling).
    """
    if requested_size <= 0:
        raise ValueError("requested_size must be positive")
    if isinstance(selector, str):
        label = label or selector
        predicate = selector_for_label(selector)
    else:
        predicate = selector
        if label is None:
            raise ValueError("a label is required with a callable selector")

    pool = sorted((r.voter_id for r in records if predicate(r)))
    if not pool:
        raise DataError("no records match selector %r" % label)
    if len(pool) <= requested_size:
        if len(pool) < requested_size:
            log.warning("audience %s: pool %d smaller than requested %d",
                        label, len(pool), requested_size)
        return AudienceSpec(label, set(pool), seed, requested_size,
                            shortfall=len(pool) < requested_size)
    rng = np.random.default_rng(seed)
    chosen = rng.choice(len(pool), size=requested_size, replace=False)
    return AudienceSpec(label, {pool[i] for i in chosen}, seed, requested_size)


def verify_disjoint(a: AudienceSpec, b: AudienceSpec) -> int:
    """Size of the overlap between two audiences; must be 0 before the
    pair may feed the skew statistic."""
    return len(a.member_ids & b.member_ids)


def size_mismatch_warning(a: AudienceSpec, b: AudienceSpec,
                          tolerance: float = 0.10) -> Optional[str]:
    """Warn when a compared pair's sizes differ by more than ``tolerance``
    of the larger one; unequal coverage biases the comparison."""
    larger = max(len(a), len(b))
    if larger == 0:
        return None
    gap = abs(len(a) - len(b)) / larger
    if gap > tolerance:
        message = ("audience sizes differ by %.0f%% (%s=%d vs %s=%d); "
                   "consider equalizing before comparing"
                   % (100 * gap, a.label, len(a), b.label, len(b)))
        log.warning(message)
        return message
    return None


# ---------------------------------------------------------------------------
# JSON wire format: {"label", "seed", "requested_size", "member_ids": [...]}
# ---------------------------------------------------------------------------

def audience_to_json(spec: AudienceSpec, destination) -> None:
    payload = {
        "label": spec.label,
        "seed": spec.sample_seed,
        "requested_size": spec.requested_size,
        "member_ids": sorted(spec.member_ids),
    }
    with open(destination, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=0, sort_keys=True)
        fh.write("\n")


def audience_from_json(source) -> AudienceSpec:
    try:
        with open(source, encoding="utf-8") as fh:
            payload = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError("cannot read audience spec %s: %s" % (source, exc)) from exc
    try:
        member_ids = set(payload["member_ids"])
        spec = AudienceSpec(payload["label"], member_ids, int(payload["seed"]),
                            int(payload["requested_size"]),
                            shortfall=len(member_ids) < int(payload["requested_size"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError("audience spec %s is malformed: %s" % (source, exc)) from exc
    return spec
