import json
import os

import numpy as np
import pytest

from proxyaudit.analytics import sigmoid_response
from proxyaudit.report import (emit_plots, read_bundle, sha256_file,
                               write_bundle, write_manifest)


def full_bundle():
    xs = np.linspace(-0.9, 0.9, 25)
    ys = sigmoid_response(xs, -0.73, 6.25)
    return {
        "skew_histogram": {
            "bin_width": 0.5,
            "edges": [-1.0, -0.5, 0.0, 0.5, 1.0],
            "counts": {"RD": [1, 5, 3, 1], "WB": [0, 2, 2, 0]},
            "undefined": {"RD": 1, "WB": 0},
        },
        "coverage": [
            {"pair": "RD", "pearson_r": 0.98,
             "points": [["i1", 0.1, 0.12], ["i2", 0.2, 0.21], ["i3", 0.05, 0.04]]},
        ],
        "spend_cdfs": [
            {"group": "Progressives", "mode": "Include", "leaning": "DemocraticSkew",
             "spends_micros": [1_000_000, 2_000_000, 14_696_000_000],
             "median_micros": 2_000_000.0, "mean_micros": 4_899_666_666.7},
            {"group": "Progressives", "mode": "Include", "leaning": "RepublicanSkew",
             "spends_micros": [1_387_000_000],
             "median_micros": 1_387_000_000.0, "mean_micros": 1_387_000_000.0},
        ],
        "fits": [
            {"mode": "Include", "intercept": -0.73, "coefficient": 6.25,
             "r_squared": 0.999, "n_points": 25,
             "points": [[float(x), float(y)] for x, y in zip(xs, ys)]},
        ],
        "pruning": [
            {"k": 0, "coverage": 1.0, "pearson_r": 0.51, "n_joint": 40},
            {"k": 4, "coverage": 0.97, "pearson_r": 0.66, "n_joint": 38},
        ],
    }


class TestEmitPlots:
    def test_full_bundle_emits_all_sections(self, tmp_path):
        result = emit_plots(full_bundle(), tmp_path)
        assert not result.skipped
        names = set(result.written)
        assert "skew_histogram_rd.svg" in names
        assert "skew_histogram_rd.csv" in names
        assert "coverage_scatter_rd.svg" in names
        assert "spend_cdf_progressives_include.svg" in names
        assert "fit_curve_include.svg" in names
        assert "pruning_curve.csv" in names
        for name in names:
            assert (tmp_path / name).exists()

    def test_every_svg_has_sibling_csv(self, tmp_path):
        result = emit_plots(full_bundle(), tmp_path)
        svgs = {n[:-4] for n in result.written if n.endswith(".svg")}
        csvs = {n[:-4] for n in result.written if n.endswith(".csv")}
        assert svgs == csvs

    def test_byte_identical_across_runs(self, tmp_path):
        bundle = full_bundle()
        first_dir = tmp_path / "a"
        second_dir = tmp_path / "b"
        first = emit_plots(bundle, first_dir)
        second = emit_plots(bundle, second_dir)
        assert first.written == second.written
        for name in first.written:
            assert (first_dir / name).read_bytes() == (second_dir / name).read_bytes()

    def test_partial_bundle_lists_skipped(self, tmp_path):
        result = emit_plots({"pruning": full_bundle()["pruning"]}, tmp_path)
        assert "skew_histogram" in result.skipped
        assert "coverage" in result.skipped
        assert "fits" in result.skipped
        assert "pruning_curve.svg" in result.written

    def test_empty_histogram_axes_only(self, tmp_path):
        bundle = {"skew_histogram": {"bin_width": 0.5,
                                     "edges": [-1.0, -0.5, 0.0, 0.5, 1.0],
                                     "counts": {"RD": [0, 0, 0, 0]},
                                     "undefined": {"RD": 0}}}
        result = emit_plots(bundle, tmp_path)
        svg = (tmp_path / "skew_histogram_rd.svg").read_text()
        assert "<rect" in svg          # background only
        assert svg.count("<rect") == 1  # no bars
        csv_lines = (tmp_path / "skew_histogram_rd.csv").read_text().splitlines()
        assert len(csv_lines) == 5      # header + 4 zero bins

    def test_fit_curve_passes_through_generating_points(self, tmp_path):
        bundle = full_bundle()
        emit_plots(bundle, tmp_path)
        entry = bundle["fits"][0]
        for x, y in entry["points"]:
            fitted = float(sigmoid_response([x], entry["intercept"],
                                            entry["coefficient"])[0])
            assert fitted == pytest.approx(y, abs=1e-9)

    def test_coverage_diagonal_for_identical_vectors(self, tmp_path):
        bundle = {"coverage": [{"pair": "RD", "pearson_r": 1.0,
                                "points": [["i%d" % k, 0.1 * k, 0.1 * k]
                                           for k in range(1, 5)]}]}
        emit_plots(bundle, tmp_path)
        rows = (tmp_path / "coverage_scatter_rd.csv").read_text().splitlines()[1:]
        for row in rows:
            _, a, b = row.split(",")
            assert a == b


class TestBundleIO:
    def test_round_trip(self, tmp_path):
        bundle = full_bundle()
        path = tmp_path / "bundle.json"
        write_bundle(bundle, path)
        assert read_bundle(path) == json.loads(json.dumps(bundle))


class TestManifest:
    def test_every_output_referenced_with_hash(self, tmp_path):
        names = []
        for i in range(3):
            path = tmp_path / ("artifact%d.csv" % i)
            path.write_text("data%d\n" % i)
            names.append(path.name)
        write_manifest(tmp_path, "analyze", {"key": "value"}, {"in.csv": "abc"}, names)
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert set(manifest["outputs"]) == set(names)
        for name, digest in manifest["outputs"].items():
            assert digest == sha256_file(tmp_path / name)
        assert manifest["config"] == {"key": "value"}
        assert manifest["command"] == "analyze"
