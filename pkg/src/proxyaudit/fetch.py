"""Rate-limited fetching of targeting reports from replay or HTTP backends.

No live platform endpoints are contacted; fetchers speak either to a
replay directory of canonical-schema files or to a mock HTTP endpoint.

Replay directory layout: one file per (advertiser, collection day),
named ``{advertiser_id}_{YYYY-MM-DD}.json``; a ``.missing`` extension
marks collection days on which the backend returned no targeting data
for that advertiser.

HTTP endpoint protocol: GET /dates -> JSON list of collection days,
GET /advertisers?date=D -> JSON list of ids, GET /report/{id}?date=D ->
canonical payload (200), no-data marker (204), or transport-ish failures
(429/5xx, retried with backoff).
"""

from __future__ import annotations

import datetime
import hashlib
import logging
import os
import threading
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import requests

from .adlib import (CollectionStats, TargetingReportSnapshot,
                    parse_targeting_report)
from .errors import BackendError, ConfigError, DataError, PayloadError

log = logging.getLogger(__name__)


class MissingData:
    """Marker: the backend answered but reported no targeting data."""

    def __repr__(self):
        return "MissingData"


MISSING = MissingData()


class RateLimiter:
    """Enforces a minimum interval between request starts and a bound on
    in-flight requests.  Thread-safe; acquire() blocks until both the
    interval and an in-flight slot are available."""

    def __init__(self, min_delay_ms: float = 0.0, max_in_flight: int = 1):
        if min_delay_ms < 0:
            raise ConfigError("min_delay_ms must be >= 0")
        if max_in_flight < 1:
            raise ConfigError("max_in_flight must be >= 1")
        self.min_delay = min_delay_ms / 1000.0
        self._interval_lock = threading.Lock()
        self._slots = threading.BoundedSemaphore(max_in_flight)
        self._last_start = None

    def acquire(self):
        self._slots.acquire()
        with self._interval_lock:
            now = time.monotonic()
            if self._last_start is not None:
                wait = self._last_start + self.min_delay - now
                if wait > 0:
                    time.sleep(wait)
                    now = time.monotonic()
            self._last_start = now

    def release(self):
        self._slots.release()

    def __enter__(self):
        self.acquire()
        return self

    def __exit__(self, *exc):
        self.release()


@dataclass(frozen=True)
class RetryPolicy:
    max_retries: int = 3
    backoff_base_s: float = 0.2
    backoff_factor: float = 2.0

    def delay(self, attempt: int) -> float:
        return self.backoff_base_s * (self.backoff_factor ** attempt)


@dataclass
class FetchFailure:
    advertiser_id: str
    date: Optional[datetime.date]
    error: str


class ReplayFetcher:
    """Serves recorded payloads from a directory; never touches the network."""

    def __init__(self, directory):
        if not os.path.isdir(directory):
            raise ConfigError("replay directory %s does not exist" % directory)
        self.directory = directory
        self._index: Dict[Tuple[str, datetime.date], Union[str, MissingData]] = {}
        for name in sorted(os.listdir(directory)):
            stem, ext = os.path.splitext(name)
            if ext not in (".json", ".missing") or "_" not in stem:
                continue
            advertiser_id, _, datepart = stem.rpartition("_")
            try:
                date = datetime.date.fromisoformat(datepart)
            except ValueError:
                log.warning("ignoring replay file with unparseable date: %s", name)
                continue
            key = (advertiser_id, date)
            self._index[key] = MISSING if ext == ".missing" else os.path.join(directory, name)

    def dates(self) -> List[datetime.date]:
        return sorted({date for _, date in self._index})

    def advertiser_list(self, date: Optional[datetime.date] = None) -> List[str]:
        seen = []
        for advertiser_id, d in sorted(self._index):
            if date is not None and d != date:
                continue
            if advertiser_id not in seen:
                seen.append(advertiser_id)
        return seen

    def targeting_report(self, advertiser_id: str,
                         date: Optional[datetime.date] = None) -> Union[bytes, MissingData]:
        if date is None:
            candidates = sorted(d for a, d in self._index if a == advertiser_id)
            if not candidates:
                raise DataError("no replay data for advertiser %s" % advertiser_id)
            date = candidates[-1]
        entry = self._index.get((advertiser_id, date))
        if entry is None:
            raise DataError("no replay data for advertiser %s on %s" % (advertiser_id, date))
        if entry is MISSING:
            return MISSING
        with open(entry, "rb") as fh:
            return fh.read()


class HttpFetcher:
    """Talks to a canonical-schema HTTP endpoint (a mock in this toolkit)."""

    def __init__(self, endpoint: str, timeout: float = 10.0, session=None):
        self.endpoint = endpoint.rstrip("/")
        self.timeout = timeout
        self.session = session or requests.Session()

    def _get(self, path: str, params=None) -> requests.Response:
        try:
            response = self.session.get(self.endpoint + path, params=params,
                                         timeout=self.timeout)
        except requests.RequestException as exc:
            raise BackendError("transport failure on %s: %s" % (path, exc)) from exc
        if response.status_code in (408, 429) or response.status_code >= 500:
            raise BackendError("endpoint returned %d for %s" % (response.status_code, path))
        return response

    def dates(self) -> List[datetime.date]:
        response = self._get("/dates")
        if response.status_code != 200:
            raise DataError("endpoint /dates returned %d" % response.status_code)
        return sorted(datetime.date.fromisoformat(d) for d in response.json())

    def advertiser_list(self, date: Optional[datetime.date] = None) -> List[str]:
        params = {"date": date.isoformat()} if date else None
        response = self._get("/advertisers", params)
        if response.status_code != 200:
            raise DataError("endpoint /advertisers returned %d" % response.status_code)
        try:
            payload = response.json()
            if not isinstance(payload, list):
                raise ValueError("payload is not a list")
        except ValueError as exc:
            digest = hashlib.sha256(response.content).hexdigest()[:12]
            raise DataError("advertiser list parse error (payload %s): %s"
                            % (digest, exc)) from exc
        return [str(a) for a in payload]

    def targeting_report(self, advertiser_id: str,
                         date: Optional[datetime.date] = None) -> Union[bytes, MissingData]:
        params = {"date": date.isoformat()} if date else None
        response = self._get("/report/%s" % advertiser_id, params)
        if response.status_code == 204:
            return MISSING
        if response.status_code != 200:
            raise DataError("report request for %s returned %d"
                            % (advertiser_id, response.status_code))
        return response.content


def fetch_advertiser_list(fetcher, date: Optional[datetime.date] = None,
                          retry: RetryPolicy = RetryPolicy(),
                          _sleep=time.sleep) -> List[str]:
    """Advertiser ids active on ``date``, deduplicated in listing order.

    An empty list is a valid answer.  Transport errors are retried per
    policy before giving up with BackendError.
    """
    attempts = 0
    while True:
        try:
            listing = fetcher.advertiser_list(date)
            break
        except BackendError as exc:
            if attempts >= retry.max_retries:
                raise BackendError("advertiser list: retries exhausted after "
                                   "%d attempts: %s" % (attempts + 1, exc)) from exc
            delay = retry.delay(attempts)
            attempts += 1
            log.info("advertiser list: retry %d after %.2fs (%s)", attempts, delay, exc)
            _sleep(delay)
    seen = set()
    out = []
    for advertiser_id in listing:
        if advertiser_id not in seen:
            seen.add(advertiser_id)
            out.append(advertiser_id)
    return out


def fetch_targeting_report(fetcher, advertiser_id: str, limiter: RateLimiter,
                           date: Optional[datetime.date] = None,
                           retry: RetryPolicy = RetryPolicy(),
                           _sleep=time.sleep):
    """One rate-limited report fetch with retry/backoff.

    Returns (payload bytes | MISSING, retries used).  Raises BackendError
    once retries are exhausted; callers record the failure and continue.
    """
    attempts = 0
    while True:
        with limiter:
            try:
                return fetcher.targeting_report(advertiser_id, date), attempts
            except BackendError as exc:
                if attempts >= retry.max_retries:
                    raise BackendError(
                        "advertiser %s: retries exhausted after %d attempts: %s"
                        % (advertiser_id, attempts + 1, exc)) from exc
                delay = retry.delay(attempts)
                attempts += 1
                log.info("advertiser %s: retry %d after %.2fs (%s)",
                         advertiser_id, attempts, delay, exc)
        _sleep(delay)


@dataclass
class CollectionResult:
    snapshots: List[TargetingReportSnapshot] = field(default_factory=list)
    stats: CollectionStats = CollectionStats()
    failures: List[FetchFailure] = field(default_factory=list)


def collect_targeting_data(fetcher, limiter: RateLimiter,
                           dates: Optional[Sequence[datetime.date]] = None,
                           retry: RetryPolicy = RetryPolicy()) -> CollectionResult:
    """Run the daily collection loop over every date and advertiser.

    Transport failures and malformed payloads become failure records (the
    run continues); no-data answers are counted toward the missing rate.
    """
    if dates is None:
        dates = fetcher.dates()
    result = CollectionResult()
    requests_made = missing = transport = parse_failures = retries = 0
    for date in dates:
        for advertiser_id in fetch_advertiser_list(fetcher, date):
            requests_made += 1
            try:
                payload, used = fetch_targeting_report(fetcher, advertiser_id,
                                                       limiter, date, retry)
                retries += used
            except BackendError as exc:
                transport += 1
                result.failures.append(FetchFailure(advertiser_id, date, str(exc)))
                continue
            except DataError as exc:
                # Non-retryable answer (e.g. unknown advertiser); the run
                # continues with a failure record.
                result.failures.append(FetchFailure(advertiser_id, date, str(exc)))
                continue
            if payload is MISSING:
                missing += 1
                continue
            try:
                result.snapshots.append(parse_targeting_report(payload, snapshot_date=date))
            except PayloadError as exc:
                digest = hashlib.sha256(
                    payload if isinstance(payload, bytes) else str(payload).encode()
                ).hexdigest()[:12]
                parse_failures += 1
                result.failures.append(FetchFailure(
                    advertiser_id, date, "parse error (payload %s): %s" % (digest, exc)))
    result.stats = CollectionStats(
        requests=requests_made, missing=missing, transport_failures=transport,
        parse_failures=parse_failures, retries=retries)
    return result
