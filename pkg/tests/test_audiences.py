import pytest

from proxyaudit.audiences import (AudienceSpec, VoterRecord, audience_from_json,
                                  audience_to_json, build_uniform_audience,
                                  load_voter_records, size_mismatch_warning,
                                  verify_disjoint)
from proxyaudit.errors import DataError

HEADER = "voter_id,state,party,race\n"


def write(tmp_path, body, name="voters.csv"):
    path = tmp_path / name
    path.write_text(HEADER + body)
    return path


def make_records(n, party="REP", race="WHITE"):
    return [VoterRecord("v%05d" % i, "FL", party, race) for i in range(n)]


class TestLoadVoterRecords:
    def test_header_only(self, tmp_path):
        records, report = load_voter_records(write(tmp_path, ""))
        assert records == []
        assert report.rejected_count == 0

    def test_one_row_per_party(self, tmp_path):
        body = "a,FL,REP,WHITE\nb,GA,DEM,BLACK\nc,NC,OTH,HISPANIC\n"
        records, report = load_voter_records(write(tmp_path, body))
        assert len(records) == 3
        assert {r.party for r in records} == {"REP", "DEM", "OTH"}

    def test_malformed_rows_reported_with_line_numbers(self, tmp_path):
        body = ("good1,FL,REP,WHITE\n"
                ",FL,REP,WHITE\n"            # empty id (line 3)
                "bad2,XX,REP,WHITE\n"        # bad state (line 4)
                "bad3,FL,WHIG,WHITE\n"       # bad party (line 5)
                "bad4,FL,REP,MARTIAN\n"      # bad race (line 6)
                "good2,TN,DEM,BLACK\n"
                "good3,GA,OTH,OTHER\n"
                "good4,SC,DEM,HISPANIC\n"
                "good5,AL,REP,WHITE\n")
        records, report = load_voter_records(write(tmp_path, body))
        assert len(records) == 5
        assert [line for line, _ in report.rejected] == [3, 4, 5, 6]

    def test_duplicate_ids_rejected(self, tmp_path):
        body = "a,FL,REP,WHITE\na,FL,DEM,WHITE\nb,FL,DEM,BLACK\n"
        records, report = load_voter_records(write(tmp_path, body))
        assert len(records) == 2
        assert "duplicate" in report.rejected[0][1]

    def test_majority_rejected_is_fatal(self, tmp_path):
        body = "a,FL,REP,WHITE\nbad,XX,REP,WHITE\nworse,XX,REP,WHITE\n"
        with pytest.raises(DataError, match="format mismatch"):
            load_voter_records(write(tmp_path, body))

    def test_unreadable_source_fatal(self, tmp_path):
        with pytest.raises(DataError):
            load_voter_records(tmp_path / "missing.csv")

    def test_wrong_header_fatal(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("id,party\n1,REP\n")
        with pytest.raises(DataError, match="header"):
            load_voter_records(path)

    def test_custom_state_allow_list(self, tmp_path):
        body = "a,CA,REP,WHITE\n"
        records, report = load_voter_records(write(tmp_path, body),
                                             allow_states=("CA",))
        assert len(records) == 1


class TestBuildUniformAudience:
    def test_empty_pool_errors_with_selector_name(self):
        records = make_records(10, party="DEM")
        with pytest.raises(DataError, match="REP"):
            build_uniform_audience(records, "REP", 5, seed=1)

    def test_shortfall_returns_whole_pool(self):
        records = make_records(10)
        spec = build_uniform_audience(records, "REP", 50, seed=1)
        assert len(spec) == 10
        assert spec.shortfall
        assert spec.requested_size == 50

    def test_exact_requested_size(self):
        # Scaled-down version of the two-million-from-larger-pool case.
        records = make_records(5000)
        spec = build_uniform_audience(records, "REP", 2000, seed=1)
        assert len(spec) == 2000
        assert not spec.shortfall

    def test_deterministic_for_seed(self):
        records = make_records(100)
        a = build_uniform_audience(records, "REP", 10, seed=42)
        b = build_uniform_audience(records, "REP", 10, seed=42)
        c = build_uniform_audience(records, "REP", 10, seed=43)
        assert a.member_ids == b.member_ids
        assert a.member_ids != c.member_ids

    def test_order_of_records_does_not_matter(self):
        records = make_records(100)
        a = build_uniform_audience(records, "REP", 10, seed=42)
        b = build_uniform_audience(list(reversed(records)), "REP", 10, seed=42)
        assert a.member_ids == b.member_ids

    def test_label_purity(self):
        records = make_records(50, party="REP") + make_records(50, party="DEM")
        # Distinct ids for the two halves:
        records = [VoterRecord("r%d" % i, "FL", "REP", "WHITE") for i in range(50)] + \
                  [VoterRecord("d%d" % i, "FL", "DEM", "WHITE") for i in range(50)]
        spec = build_uniform_audience(records, "DEM", 30, seed=5)
        assert all(m.startswith("d") for m in spec.member_ids)

    def test_race_selector(self):
        records = [VoterRecord("w%d" % i, "FL", "REP", "WHITE") for i in range(20)] + \
                  [VoterRecord("b%d" % i, "FL", "REP", "BLACK") for i in range(20)]
        spec = build_uniform_audience(records, "BLACK", 10, seed=5)
        assert all(m.startswith("b") for m in spec.member_ids)

    def test_callable_selector_needs_label(self):
        with pytest.raises(ValueError):
            build_uniform_audience(make_records(5), lambda r: True, 2, seed=0)

    def test_uniformity_of_single_draws(self):
        # 1,000 reseeded draws of size 1 from a pool of 10: every member
        # should be picked roughly 10% of the time.
        records = make_records(10)
        freq = {r.voter_id: 0 for r in records}
        for seed in range(1000):
            spec = build_uniform_audience(records, "REP", 1, seed=seed)
            freq[next(iter(spec.member_ids))] += 1
        for count in freq.values():
            assert 0.05 <= count / 1000 <= 0.15


class TestDisjointness:
    def test_party_specs_disjoint(self):
        records = [VoterRecord("r%d" % i, "FL", "REP", "WHITE") for i in range(30)] + \
                  [VoterRecord("d%d" % i, "FL", "DEM", "WHITE") for i in range(30)]
        rep = build_uniform_audience(records, "REP", 20, seed=1)
        dem = build_uniform_audience(records, "DEM", 20, seed=2)
        assert verify_disjoint(rep, dem) == 0

    def test_spec_vs_itself(self):
        spec = AudienceSpec("REP", {"a", "b", "c"}, 0, 3)
        assert verify_disjoint(spec, spec) == 3

    def test_race_specs_disjoint_exhaustive(self):
        records = [VoterRecord("w%d" % i, "FL", "REP", "WHITE") for i in range(30)] + \
                  [VoterRecord("b%d" % i, "FL", "REP", "BLACK") for i in range(30)]
        white = build_uniform_audience(records, "WHITE", 30, seed=1)
        black = build_uniform_audience(records, "BLACK", 30, seed=2)
        assert verify_disjoint(white, black) == 0
        for member in white.member_ids:
            assert member not in black.member_ids


class TestSizeWarning:
    def test_warns_over_threshold(self):
        a = AudienceSpec("REP", {str(i) for i in range(100)}, 0, 100)
        b = AudienceSpec("DEM", {str(i) for i in range(80)}, 0, 80)
        assert size_mismatch_warning(a, b) is not None

    def test_silent_within_threshold(self):
        a = AudienceSpec("REP", {str(i) for i in range(100)}, 0, 100)
        b = AudienceSpec("DEM", {str(i) for i in range(95)}, 0, 95)
        assert size_mismatch_warning(a, b) is None


class TestAudienceJson:
    def test_round_trip(self, tmp_path):
        spec = build_uniform_audience(make_records(50), "REP", 20, seed=9)
        path = tmp_path / "audience_REP.json"
        audience_to_json(spec, path)
        loaded = audience_from_json(path)
        assert loaded.label == "REP"
        assert loaded.member_ids == spec.member_ids
        assert loaded.sample_seed == 9
        assert not loaded.shortfall

    def test_wire_format_keys(self, tmp_path):
        import json
        spec = AudienceSpec("DEM", {"x"}, 3, 5)
        path = tmp_path / "audience.json"
        audience_to_json(spec, path)
        payload = json.loads(path.read_text())
        assert set(payload) == {"label", "seed", "requested_size", "member_ids"}

    def test_malformed_spec_errors(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{\"label\": \"REP\"}")
        with pytest.raises(DataError):
            audience_from_json(path)
