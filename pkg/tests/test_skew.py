import math

import pytest

from proxyaudit.errors import ConfigError, DataError
from proxyaudit.reach import EstimateMatrix
from proxyaudit.skew import (DEFAULT_TERTILE_THRESHOLDS, Leaning, SkewScore,
                             SkewThresholds, classify_tertile, compute_skew,
                             derive_tertile_thresholds, read_skew_table,
                             skew_histogram, skew_table, write_skew_table)


class TestComputeSkew:
    def test_worked_example(self):
        score = compute_skew(111374, 903884, 43085, 822108)
        assert score.value == pytest.approx(0.40, abs=0.005)
        assert score.reliable

    def test_equal_rates_give_zero(self):
        assert compute_skew(50, 1000, 100, 2000).value == 0.0

    def test_one_sided_interest_is_plus_one(self):
        assert compute_skew(10, 1000, 0, 2000).value == 1.0
        assert compute_skew(0, 1000, 10, 2000).value == -1.0

    def test_no_coverage_is_undefined_not_zero(self):
        score = compute_skew(0, 1000, 0, 2000)
        assert score.value is None
        assert not score.defined
        assert score.reason

    def test_antisymmetry_exact(self):
        a = compute_skew(123, 4567, 89, 1011)
        b = compute_skew(89, 1011, 123, 4567)
        assert a.value == -b.value

    def test_integer_scale_invariance_exact(self):
        base = compute_skew(37, 500, 11, 400)
        scaled = compute_skew(37 * 7, 500 * 7, 11, 400)
        assert scaled.value == base.value

    def test_bounds(self):
        assert -1.0 <= compute_skew(1, 2, 1, 1000000).value <= 1.0

    def test_precondition_violations(self):
        with pytest.raises(ValueError):
            compute_skew(1, 0, 1, 10)
        with pytest.raises(ValueError):
            compute_skew(11, 10, 1, 10)
        with pytest.raises(ValueError):
            compute_skew(-1, 10, 1, 10)

    def test_small_counts_flagged_unreliable(self):
        score = compute_skew(30, 1000, 400, 1000)
        assert not score.reliable
        assert compute_skew(30, 1000, 400, 1000, min_reliable_count=10).reliable


class TestSkewTable:
    def _matrix(self):
        return EstimateMatrix(
            audiences=["REP", "DEM"],
            interests=["i1", "i2", "i3"],
            totals={"REP": 1000, "DEM": 2000},
            cells={("REP", "i1"): 123, ("DEM", "i1"): 52,
                   ("REP", "i2"): 0, ("DEM", "i2"): 0,
                   ("REP", "i3"): 500, ("DEM", "i3"): 1000},
        )

    def test_basic_table(self):
        table = skew_table(self._matrix(), pairs=("RD",), min_reliable_count=10)
        assert table["i1"]["RD"].value == compute_skew(123, 1000, 52, 2000).value
        assert table["i2"]["RD"].value is None
        assert table["i3"]["RD"].value == 0.0

    def test_missing_totals_is_config_error(self):
        matrix = self._matrix()
        del matrix.totals["DEM"]
        with pytest.raises(ConfigError):
            skew_table(matrix, pairs=("RD",))

    def test_unknown_pair_rejected(self):
        with pytest.raises(ConfigError):
            skew_table(self._matrix(), pairs=("XY",))

    def test_failed_cell_gives_undefined_with_reason(self):
        matrix = self._matrix()
        del matrix.cells[("DEM", "i1")]
        matrix.errors[("DEM", "i1")] = "no fixture for query"
        table = skew_table(matrix, pairs=("RD",))
        assert table["i1"]["RD"].value is None
        assert "no fixture" in table["i1"]["RD"].reason

    def test_interest_absent_everywhere_undefined_for_all_pairs(self):
        matrix = EstimateMatrix(
            audiences=["REP", "DEM", "WHITE", "BLACK"],
            interests=["ghost"],
            totals={"REP": 10, "DEM": 10, "WHITE": 10, "BLACK": 10},
            cells={(a, "ghost"): 0 for a in ("REP", "DEM", "WHITE", "BLACK")},
        )
        table = skew_table(matrix, pairs=("RD", "WB"))
        assert table["ghost"]["RD"].value is None
        assert table["ghost"]["WB"].value is None


class TestTertiles:
    def test_paper_style_thresholds(self):
        t = SkewThresholds(-0.073, 0.063)
        make = lambda v: SkewScore(v, "RD", 100, 1000, 100, 1000)
        assert classify_tertile(make(-0.074), t) is Leaning.DEMOCRATIC_SKEW
        assert classify_tertile(make(-0.073), t) is Leaning.NEUTRAL
        assert classify_tertile(make(0.0629), t) is Leaning.NEUTRAL
        # Republican boundary is inclusive.
        assert classify_tertile(make(0.063), t) is Leaning.REPUBLICAN_SKEW

    def test_undefined_and_unreliable_are_unavailable(self):
        t = DEFAULT_TERTILE_THRESHOLDS
        undefined = SkewScore(None, "RD", 0, 1000, 0, 1000, reliable=False)
        unreliable = SkewScore(0.9, "RD", 3, 1000, 1, 1000, reliable=False)
        assert classify_tertile(undefined, t) is Leaning.UNAVAILABLE
        assert classify_tertile(unreliable, t) is Leaning.UNAVAILABLE

    def test_invalid_threshold_order_rejected(self):
        with pytest.raises(ConfigError):
            SkewThresholds(0.5, -0.5)

    def _quantile_oracle(self, values, q):
        # Independent check: sort and linearly interpolate by hand.
        ordered = sorted(values)
        position = q * (len(ordered) - 1)
        lo = math.floor(position)
        hi = math.ceil(position)
        return ordered[lo] + (position - lo) * (ordered[hi] - ordered[lo])

    def test_derive_matches_quantile_oracle(self):
        values = [-1.0, 0.0, 1.0]
        scores = [SkewScore(v, "RD", 100, 1000, 100, 1000) for v in values]
        t = derive_tertile_thresholds(scores)
        assert t.democratic_below == pytest.approx(
            self._quantile_oracle(values, 1 / 3), abs=1e-12)
        assert t.republican_at_or_above == pytest.approx(
            self._quantile_oracle(values, 2 / 3), abs=1e-12)
        assert t.democratic_below == pytest.approx(-1 / 3, abs=1e-12)
        assert t.republican_at_or_above == pytest.approx(1 / 3, abs=1e-12)

    def test_derive_larger_corpus_against_oracle(self):
        values = [(-1) ** i * (i / 37.0 % 1.0) for i in range(40)]
        scores = [SkewScore(v, "RD", 100, 1000, 100, 1000) for v in values]
        t = derive_tertile_thresholds(scores)
        assert t.democratic_below == pytest.approx(
            self._quantile_oracle(values, 1 / 3), abs=1e-12)
        assert t.republican_at_or_above == pytest.approx(
            self._quantile_oracle(values, 2 / 3), abs=1e-12)

    def test_derive_ignores_undefined_and_needs_three(self):
        scores = [SkewScore(None, "RD", 0, 1, 0, 1)] * 5 + [
            SkewScore(0.1, "RD", 1, 1, 1, 1)]
        with pytest.raises(DataError):
            derive_tertile_thresholds(scores)

    def test_degenerate_thresholds_flagged(self):
        scores = [SkewScore(0.25, "RD", 1, 1, 1, 1)] * 5
        t = derive_tertile_thresholds(scores)
        assert t.degenerate


class TestHistogram:
    def test_empty_input_all_zero_bins(self):
        hist = skew_histogram([], 0.1)
        assert hist.counts == {}
        assert len(hist.edges) == 21

    def test_single_score_lands_in_expected_bin(self):
        hist = skew_histogram([SkewScore(0.40, "RD", 1, 10, 1, 10)], 0.1)
        # [0.4, 0.5) is bin index 14 of 20.
        assert hist.counts["RD"][14] == 1
        assert sum(hist.counts["RD"]) == 1

    def test_boundary_values(self):
        scores = [SkewScore(v, "RD", 1, 10, 1, 10) for v in (-1.0, 1.0)]
        hist = skew_histogram(scores, 0.5)
        assert hist.counts["RD"][0] == 1
        assert hist.counts["RD"][-1] == 1

    def test_undefined_counted_separately(self):
        scores = [SkewScore(None, "RD", 0, 10, 0, 10),
                  SkewScore(0.0, "RD", 1, 10, 1, 10)]
        hist = skew_histogram(scores, 0.25)
        assert hist.undefined["RD"] == 1
        assert sum(hist.counts["RD"]) == 1

    def test_bad_bin_width(self):
        with pytest.raises(ValueError):
            skew_histogram([], 0.0)


class TestTableRoundTrip:
    def test_write_and_read(self, tmp_path):
        table = {
            "i1": {"RD": compute_skew(123, 1000, 52, 2000, min_reliable_count=10)},
            "i2": {"RD": compute_skew(0, 1000, 0, 2000)},
        }
        path = tmp_path / "skews.csv"
        rows = write_skew_table(table, path, names={"i1": "First Interest"})
        assert rows == 2
        header = path.read_text().splitlines()[0]
        assert header == "interest_id,interest_name,pair,value,reliable,n_a_i,n_a,n_b_i,n_b"
        loaded = read_skew_table(path)
        assert loaded["i1"]["RD"].value == table["i1"]["RD"].value
        assert loaded["i2"]["RD"].value is None
        assert loaded["i1"]["RD"].n_b == 2000
