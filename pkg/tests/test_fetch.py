import datetime
import json
import time

import pytest

from proxyaudit.errors import BackendError, ConfigError, DataError
from proxyaudit.fetch import (MISSING, HttpFetcher, RateLimiter, ReplayFetcher,
                              RetryPolicy, collect_targeting_data,
                              fetch_advertiser_list, fetch_targeting_report)

from mockserver import MockAdLibServer

D = datetime.date


def canonical(advertiser, start="2022-10-08", end="2022-10-14", total=50.0,
              criteria=None):
    return {"advertiser_id": advertiser, "window_start": start,
            "window_end": end, "total_spend": total,
            "criteria": criteria or [
                {"name": "Politics", "kind": "Interest", "mode": "Include",
                 "num_ads": 1, "spend_fraction": 0.5}]}


def write_replay(tmp_path, entries, missing=()):
    """entries: {(advertiser, iso_date): payload dict}"""
    directory = tmp_path / "replay"
    directory.mkdir(exist_ok=True)
    for (advertiser, date), body in entries.items():
        (directory / ("%s_%s.json" % (advertiser, date))).write_text(json.dumps(body))
    for advertiser, date in missing:
        (directory / ("%s_%s.missing" % (advertiser, date))).touch()
    return directory


class TestRateLimiter:
    def test_min_interval_enforced(self):
        limiter = RateLimiter(min_delay_ms=20)
        start = time.monotonic()
        for _ in range(10):
            with limiter:
                pass
        elapsed = time.monotonic() - start
        assert elapsed >= 0.18  # 9 gaps x 20ms

    def test_zero_delay_is_fast(self):
        limiter = RateLimiter(min_delay_ms=0)
        start = time.monotonic()
        for _ in range(100):
            with limiter:
                pass
        assert time.monotonic() - start < 0.5

    def test_invalid_config(self):
        with pytest.raises(ConfigError):
            RateLimiter(min_delay_ms=-1)
        with pytest.raises(ConfigError):
            RateLimiter(max_in_flight=0)


class TestReplayFetcher:
    def test_advertiser_list_deduplicated(self, tmp_path):
        directory = write_replay(tmp_path, {
            ("adv1", "2022-10-17"): canonical("adv1"),
            ("adv1", "2022-10-18"): canonical("adv1"),
            ("adv2", "2022-10-17"): canonical("adv2"),
        })
        fetcher = ReplayFetcher(directory)
        assert fetch_advertiser_list(fetcher) == ["adv1", "adv2"]
        assert fetch_advertiser_list(fetcher, D(2022, 10, 18)) == ["adv1"]
        assert fetcher.dates() == [D(2022, 10, 17), D(2022, 10, 18)]

    def test_missing_marker(self, tmp_path):
        directory = write_replay(tmp_path, {}, missing=[("adv1", "2022-10-17")])
        fetcher = ReplayFetcher(directory)
        assert fetcher.targeting_report("adv1", D(2022, 10, 17)) is MISSING

    def test_advertiser_id_with_underscores(self, tmp_path):
        directory = write_replay(tmp_path, {
            ("acct_a_b", "2022-10-17"): canonical("acct_a_b")})
        fetcher = ReplayFetcher(directory)
        assert fetcher.advertiser_list() == ["acct_a_b"]
        payload = fetcher.targeting_report("acct_a_b", D(2022, 10, 17))
        assert json.loads(payload)["advertiser_id"] == "acct_a_b"

    def test_unknown_advertiser_errors(self, tmp_path):
        fetcher = ReplayFetcher(write_replay(tmp_path, {}))
        with pytest.raises(DataError):
            fetcher.targeting_report("ghost", D(2022, 10, 17))

    def test_missing_directory(self, tmp_path):
        with pytest.raises(ConfigError):
            ReplayFetcher(tmp_path / "nowhere")


class TestRetries:
    class FlakyFetcher:
        def __init__(self, failures):
            self.failures = failures
            self.calls = 0

        def targeting_report(self, advertiser_id, date=None):
            self.calls += 1
            if self.calls <= self.failures:
                raise BackendError("boom")
            return b"{}"

    def test_succeeds_after_retries(self):
        fetcher = self.FlakyFetcher(failures=2)
        sleeps = []
        payload, retries = fetch_targeting_report(
            fetcher, "adv1", RateLimiter(), retry=RetryPolicy(max_retries=3,
                                                              backoff_base_s=0.01),
            _sleep=sleeps.append)
        assert payload == b"{}"
        assert retries == 2
        assert sleeps == [0.01, 0.02]  # exponential backoff

    def test_exhausted_retries_raise(self):
        fetcher = self.FlakyFetcher(failures=10)
        with pytest.raises(BackendError, match="retries exhausted"):
            fetch_targeting_report(fetcher, "adv1", RateLimiter(),
                                   retry=RetryPolicy(max_retries=2, backoff_base_s=0),
                                   _sleep=lambda s: None)
        assert fetcher.calls == 3


class TestHttpFetcher:
    def test_fetches_payload(self):
        with MockAdLibServer(payloads={("adv1", "2022-10-17"): canonical("adv1")}) as server:
            fetcher = HttpFetcher(server.url)
            assert fetcher.dates() == [D(2022, 10, 17)]
            assert fetcher.advertiser_list(D(2022, 10, 17)) == ["adv1"]
            payload = fetcher.targeting_report("adv1", D(2022, 10, 17))
            assert json.loads(payload)["advertiser_id"] == "adv1"

    def test_204_is_missing(self):
        with MockAdLibServer(missing={("adv1", "2022-10-17")}) as server:
            fetcher = HttpFetcher(server.url)
            assert fetcher.targeting_report("adv1", D(2022, 10, 17)) is MISSING

    def test_429_then_200_retries_once(self):
        key = ("adv1", "2022-10-17")
        with MockAdLibServer(payloads={key: canonical("adv1")},
                             fail_plan={key: [429]}) as server:
            fetcher = HttpFetcher(server.url)
            payload, retries = fetch_targeting_report(
                fetcher, "adv1", RateLimiter(), D(2022, 10, 17),
                retry=RetryPolicy(max_retries=3, backoff_base_s=0.01))
            assert retries == 1
            assert json.loads(payload)["advertiser_id"] == "adv1"
            report_hits = [p for _, p in server.request_log if p.startswith("/report/")]
            assert len(report_hits) == 2

    def test_persistent_500_exhausts(self):
        key = ("adv1", "2022-10-17")
        with MockAdLibServer(payloads={key: canonical("adv1")},
                             fail_plan={key: [500] * 10}) as server:
            fetcher = HttpFetcher(server.url)
            with pytest.raises(BackendError):
                fetch_targeting_report(fetcher, "adv1", RateLimiter(), D(2022, 10, 17),
                                       retry=RetryPolicy(max_retries=2, backoff_base_s=0),
                                       _sleep=lambda s: None)

    def test_connection_refused_is_backend_error(self):
        fetcher = HttpFetcher("http://127.0.0.1:1", timeout=0.2)
        with pytest.raises(BackendError):
            fetcher.targeting_report("adv1", D(2022, 10, 17))


class TestCollection:
    def test_replay_collection_counts(self, tmp_path):
        entries = {("adv%d" % i, "2022-10-17"): canonical("adv%d" % i)
                   for i in range(8)}
        directory = write_replay(tmp_path, entries,
                                 missing=[("advX", "2022-10-17")])
        # One unparseable payload file:
        (directory / "advBad_2022-10-17.json").write_text("{broken")
        result = collect_targeting_data(ReplayFetcher(directory), RateLimiter())
        assert result.stats.requests == 10
        assert result.stats.missing == 1
        assert result.stats.parse_failures == 1
        assert len(result.snapshots) == 8
        assert len(result.failures) == 1
        assert "payload" in result.failures[0].error

    def test_http_collection_with_failures(self):
        payloads = {("adv1", "2022-10-17"): canonical("adv1"),
                    ("adv2", "2022-10-17"): canonical("adv2")}
        with MockAdLibServer(payloads=payloads,
                             missing={("adv3", "2022-10-17")},
                             fail_plan={("adv2", "2022-10-17"): [500] * 10}) as server:
            result = collect_targeting_data(
                HttpFetcher(server.url), RateLimiter(),
                retry=RetryPolicy(max_retries=1, backoff_base_s=0))
        assert result.stats.requests == 3
        assert result.stats.missing == 1
        assert result.stats.transport_failures == 1
        assert len(result.snapshots) == 1

    def test_rate_limit_visible_in_server_log(self):
        payloads = {("adv%02d" % i, "2022-10-17"): canonical("adv%02d" % i)
                    for i in range(20)}
        with MockAdLibServer(payloads=payloads) as server:
            collect_targeting_data(HttpFetcher(server.url),
                                   RateLimiter(min_delay_ms=25))
            report_times = sorted(ts for ts, path in server.request_log
                                  if path.startswith("/report/"))
        assert len(report_times) == 20
        assert report_times[-1] - report_times[0] >= 19 * 0.025 - 0.005
