"""Reach estimation backends and checkpointed batch estimation.

A backend answers one question: given an audience, optionally narrowed to
the holders of one interest, how many weekly-active users could an ad
reach?  The synthetic backend answers from a generated population (with a
configurable estimate-degradation model, since real delivery estimators
return rough numbers); the replay backend answers from recorded fixtures.
"""

from __future__ import annotations

import csv
import hashlib
import logging
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .audiences import AudienceSpec
from .errors import BackendError, ConfigError, DataError, ReplayMissError
from .synthworld import Population

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ReachQuery:
    audience: AudienceSpec
    interest: Optional[str] = None

    def __post_init__(self):
        if len(self.audience) == 0:
            raise ValueError("audience must be non-empty")


@dataclass(frozen=True)
class ReachEstimate:
    count: int
    backend_id: str
    rounded: bool = False

    def __post_init__(self):
        if self.count < 0:
            raise ValueError("count must be >= 0")


@dataclass(frozen=True)
class NoiseModel:
    """How the synthetic backend degrades exact counts into estimates.

    mode "off" returns exact counts, "round2" rounds to two significant
    figures (the default; real estimate endpoints return rough numbers),
    "gaussian" applies multiplicative noise with the given sigma.  The
    gaussian draw is keyed on (seed, audience label, interest), so a
    query's noise is stable across calls and run order.  This model is a
    stand-in, not a calibrated description of any real platform.
    """

    mode: str = "round2"
    sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("off", "round2", "gaussian"):
            raise ConfigError("unknown noise mode %r" % self.mode)
        if self.mode == "gaussian" and self.sigma < 0:
            raise ConfigError("sigma must be >= 0")


def round_to_2_significant(n: int) -> int:
    """Round a non-negative integer to two significant figures
    (half-to-even), e.g. 903884 -> 900000."""
    if n < 100:
        return n
    scale = 10 ** (len(str(n)) - 2)
    q, r = divmod(n, scale)
    if 2 * r > scale or (2 * r == scale and q % 2 == 1):
        q += 1
    return q * scale


def _stable_gaussian(seed: int, label: str, interest: Optional[str]) -> float:
    key = "%d|%s|%s" % (seed, label, interest if interest is not None else "")
    digest = hashlib.sha256(key.encode("utf-8")).digest()
    sub_seed = int.from_bytes(digest[:8], "big")
    return float(np.random.default_rng(sub_seed).standard_normal())


class SyntheticBackend:
    """Exact counting over a synthetic population plus the noise model.

    "Weekly active" is a backend-side notion: only members flagged active
    count toward reach, regardless of how many ids the audience uploaded.
    """

    def __init__(self, population: Population, noise: NoiseModel = NoiseModel()):
        self.noise = noise
        self.backend_id = "synthetic/%s" % noise.mode
        self.rounded = noise.mode == "round2"
        self._active_ids = frozenset(m.id for m in population.members if m.active)
        self._interest_members: Dict[str, frozenset] = {}
        holders: Dict[str, set] = {i: set() for i in population.interest_ids}
        for m in population.members:
            if not m.active:
                continue
            for interest in m.interests:
                holders[interest].add(m.id)
        self._interest_members = {k: frozenset(v) for k, v in holders.items()}
        self._audience_actives: Dict[str, frozenset] = {}

    def _actives(self, audience: AudienceSpec) -> frozenset:
        cached = self._audience_actives.get(audience.label)
        if cached is None:
            cached = frozenset(audience.member_ids & self._active_ids)
            self._audience_actives[audience.label] = cached
        return cached

    def _degrade(self, exact: int, label: str, interest: Optional[str]) -> int:
        if self.noise.mode == "off":
            return exact
        if self.noise.mode == "round2":
            return round_to_2_significant(exact)
        noisy = exact * (1.0 + self.noise.sigma * _stable_gaussian(self.noise.seed, label, interest))
        return max(0, int(round(noisy)))

    def estimate(self, audience: AudienceSpec, interest: Optional[str] = None) -> int:
        actives = self._actives(audience)
        total_estimate = self._degrade(len(actives), audience.label, None)
        if interest is None:
            return total_estimate
        holders = self._interest_members.get(interest, frozenset())
        exact = len(actives & holders)
        # Conjunction can never reach more users than the audience alone;
        # noise must not break that.
        return min(self._degrade(exact, audience.label, interest), total_estimate)


class ReplayBackend:
    """Recorded estimates keyed by (audience label, interest).

    Fixture format: ``audience_label,interest_id,count`` with an empty
    interest_id for audience totals.  Immutable after load.
    """

    def __init__(self, source):
        self.backend_id = "replay/%s" % os.path.basename(str(source))
        self.rounded = False
        table: Dict[Tuple[str, Optional[str]], int] = {}
        try:
            fh = open(source, newline="", encoding="utf-8")
        except OSError as exc:
            raise DataError("cannot read replay fixture %s: %s" % (source, exc)) from exc
        with fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != ["audience_label", "interest_id", "count"]:
                raise DataError("unexpected replay fixture header %r in %s" % (header, source))
            for row in reader:
                if len(row) != 3:
                    raise DataError("malformed replay fixture row %r in %s" % (row, source))
                label, interest, count = row
                table[(label, interest or None)] = int(count)
        self._table = table

    def estimate(self, audience: AudienceSpec, interest: Optional[str] = None) -> int:
        key = (audience.label, interest)
        if key not in self._table:
            raise ReplayMissError("no fixture for query (%s, %s)"
                                  % (audience.label, interest if interest else "<total>"))
        return self._table[key]


def estimate_reach(backend, query: ReachQuery) -> ReachEstimate:
    count = backend.estimate(query.audience, query.interest)
    return ReachEstimate(count=count, backend_id=backend.backend_id,
                         rounded=getattr(backend, "rounded", False))


def coverage_fraction(backend, audience: AudienceSpec, interest: str) -> float:
    """Fraction of the audience's reachable users sharing ``interest``,
    both counts taken from the same backend."""
    total = backend.estimate(audience, None)
    if total <= 0:
        raise DataError("coverage undefined: audience %s has zero estimated reach"
                        % audience.label)
    return backend.estimate(audience, interest) / total


@dataclass
class EstimateMatrix:
    """Estimates for every audience x interest cell plus per-audience totals.

    Failed cells appear in ``errors`` (keyed (label, interest) with None
    for totals) instead of ``cells``.
    """

    audiences: List[str]
    interests: List[str]
    totals: Dict[str, int] = field(default_factory=dict)
    cells: Dict[Tuple[str, str], int] = field(default_factory=dict)
    errors: Dict[Tuple[str, Optional[str]], str] = field(default_factory=dict)

    def cell_count(self) -> int:
        return len(self.totals) + len(self.cells) + len(self.errors)

    def coverage(self, label: str, interest: str) -> Optional[float]:
        if (label, interest) in self.errors or (label, None) in self.errors:
            return None
        total = self.totals.get(label)
        cell = self.cells.get((label, interest))
        if not total or cell is None:
            return None
        return cell / total


CHECKPOINT_HEADER = ["audience_label", "interest_id", "count", "status"]


def _load_checkpoint(path) -> Dict[Tuple[str, Optional[str]], Tuple[Optional[int], str]]:
    done: Dict[Tuple[str, Optional[str]], Tuple[Optional[int], str]] = {}
    if not path or not os.path.exists(path):
        return done
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != CHECKPOINT_HEADER:
            raise DataError("unexpected checkpoint header %r in %s" % (header, path))
        for row in reader:
            if len(row) != 4:
                raise DataError("malformed checkpoint row %r in %s" % (row, path))
            label, interest, count, status = row
            done[(label, interest or None)] = (int(count) if count else None, status)
    return done


def batch_estimate(backend, audiences: Sequence[AudienceSpec],
                   interests: Sequence[str],
                   checkpoint_path=None,
                   progress_every: int = 500) -> EstimateMatrix:
    """Fill the full estimate matrix, cell by cell.

    Per audience: one total estimate, then one estimate per interest.
    Failed cells (replay misses, exhausted retries) become error markers;
    the run continues.  With ``checkpoint_path``, every completed cell is
    appended as it finishes, and a rerun skips cells already recorded ok
    (error cells are retried).  Appends are serialized by the sequential
    loop; the checkpoint file is the unit of resumability.
    """
    matrix = EstimateMatrix(audiences=[a.label for a in audiences],
                            interests=list(interests))
    done = _load_checkpoint(checkpoint_path)
    ckpt = None
    if checkpoint_path:
        fresh = not os.path.exists(checkpoint_path)
        ckpt = open(checkpoint_path, "a", newline="", encoding="utf-8")
        if fresh:
            ckpt.write(",".join(CHECKPOINT_HEADER) + "\n")

    def record(label: str, interest: Optional[str], count: Optional[int], status: str):
        if ckpt:
            ckpt.write("%s,%s,%s,%s\n" % (label, interest or "",
                                          count if count is not None else "", status))
            ckpt.flush()

    completed = 0
    total_cells = len(audiences) * (len(interests) + 1)
    try:
        for audience in audiences:
            plan: List[Optional[str]] = [None] + list(interests)
            for interest in plan:
                key = (audience.label, interest)
                prior = done.get(key)
                if prior is not None and prior[1] == "ok":
                    count = prior[0]
                else:
                    try:
                        count = backend.estimate(audience, interest)
                        record(audience.label, interest, count, "ok")
                    except BackendError as exc:
                        matrix.errors[key] = str(exc)
                        record(audience.label, interest, None, "error")
                        completed += 1
                        continue
                if interest is None:
                    matrix.totals[audience.label] = count
                else:
                    matrix.cells[key] = count
                completed += 1
                if progress_every and completed % progress_every == 0:
                    log.info("batch estimate: %d/%d cells", completed, total_cells)
    finally:
        if ckpt:
            ckpt.close()
    log.info("batch estimate complete: %d cells, %d errors",
             matrix.cell_count(), len(matrix.errors))
    return matrix


def write_matrix(matrix: EstimateMatrix, destination) -> None:
    """Export the successful cells in the replay-fixture format, so a
    completed run can serve as a replay backend later."""
    with open(destination, "w", newline="", encoding="utf-8") as fh:
        fh.write("audience_label,interest_id,count\n")
        for label in matrix.audiences:
            if label in matrix.totals:
                fh.write("%s,,%d\n" % (label, matrix.totals[label]))
            for interest in matrix.interests:
                if (label, interest) in matrix.cells:
                    fh.write("%s,%s,%d\n" % (label, interest, matrix.cells[(label, interest)]))


def read_matrix(source) -> EstimateMatrix:
    """Load a matrix exported by write_matrix (replay-fixture format)."""
    audiences: List[str] = []
    interests: List[str] = []
    totals: Dict[str, int] = {}
    cells: Dict[Tuple[str, str], int] = {}
    try:
        fh = open(source, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError("cannot read estimate matrix %s: %s" % (source, exc)) from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["audience_label", "interest_id", "count"]:
            raise DataError("unexpected matrix header %r in %s" % (header, source))
        for row in reader:
            label, interest, count = row
            if label not in audiences:
                audiences.append(label)
            if not interest:
                totals[label] = int(count)
            else:
                if interest not in interests:
                    interests.append(interest)
                cells[(label, interest)] = int(count)
    return EstimateMatrix(audiences=audiences, interests=interests,
                          totals=totals, cells=cells)
