"""Plot emission and run manifests.

The analysis bundle is a JSON document carrying exactly the values to be
plotted; emit_plots turns each present section into an SVG chart plus a
sibling CSV holding the same numbers.  Outputs are byte-deterministic
for fixed inputs.  Every file a command writes is referenced, with its
content hash, in the run manifest.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from . import svgplot
from .analytics import sigmoid_response
from .errors import DataError

SCHEMA = ("skew_histogram", "coverage", "spend_cdfs", "fits", "pruning")


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_bundle(bundle: dict, destination) -> None:
    with open(destination, "w", encoding="utf-8") as fh:
        json.dump(bundle, fh, indent=1, sort_keys=True)
        fh.write("\n")


def read_bundle(source) -> dict:
    try:
        with open(source, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError("cannot read analysis bundle %s: %s" % (source, exc)) from exc


def _write(path, content: str) -> str:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(content)
    return os.path.basename(path)


def _csv_text(header: List[str], rows: List[List]) -> str:
    import io

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)
    return buffer.getvalue()


def _r(value: Optional[float]):
    return "" if value is None else repr(float(value))


@dataclass
class EmitResult:
    written: List[str] = field(default_factory=list)
    skipped: List[str] = field(default_factory=list)


def emit_plots(bundle: dict, out_dir) -> EmitResult:
    """Emit every plot the bundle has data for; sections absent from the
    bundle are listed as skipped rather than failing the run."""
    os.makedirs(out_dir, exist_ok=True)
    result = EmitResult()

    def emit(name: str, svg: str, csv_header: List[str], csv_rows: List[List]):
        result.written.append(_write(os.path.join(out_dir, name + ".svg"), svg))
        result.written.append(_write(os.path.join(out_dir, name + ".csv"),
                                     _csv_text(csv_header, csv_rows)))

    histogram = bundle.get("skew_histogram")
    if histogram is not None:
        edges = histogram["edges"]
        rows = []
        for pair in sorted(histogram["counts"]):
            counts = histogram["counts"][pair]
            svg = svgplot.histogram_svg(edges, counts,
                                        "Skew distribution (%s)" % pair,
                                        x_label="skew", y_label="interests")
            csv_rows = [[pair, _r(edges[i]), _r(edges[i + 1]), c]
                        for i, c in enumerate(counts)]
            emit("skew_histogram_%s" % pair.lower(), svg,
                 ["pair", "bin_start", "bin_end", "count"], csv_rows)
            rows.extend(csv_rows)
        if not histogram["counts"]:
            emit("skew_histogram_all", svgplot.histogram_svg(edges, [], "Skew distribution"),
                 ["pair", "bin_start", "bin_end", "count"], [])
    else:
        result.skipped.append("skew_histogram")

    coverage = bundle.get("coverage")
    if coverage is not None:
        for entry in coverage:
            pair = entry["pair"]
            points = [(p[1], p[2]) for p in entry["points"]]
            r_text = ("r=%.3f" % entry["pearson_r"]) if entry.get("pearson_r") is not None else "r n/a"
            svg = svgplot.scatter_svg(points,
                                      "Coverage, %s (%s)" % (pair, r_text),
                                      x_label="coverage in %s" % pair[0],
                                      y_label="coverage in %s" % pair[1],
                                      diagonal=True)
            csv_rows = [[p[0], _r(p[1]), _r(p[2])] for p in entry["points"]]
            emit("coverage_scatter_%s" % pair.lower(), svg,
                 ["interest_id", "coverage_a", "coverage_b"], csv_rows)
    else:
        result.skipped.append("coverage")

    cdfs = bundle.get("spend_cdfs")
    if cdfs is not None:
        grouped: Dict[Tuple[str, str], List[dict]] = {}
        for entry in cdfs:
            grouped.setdefault((entry["group"], entry["mode"]), []).append(entry)
        for (group, mode), entries in sorted(grouped.items()):
            series = [(e["leaning"], [s / 1e6 for s in e["spends_micros"]])
                      for e in sorted(entries, key=lambda e: e["leaning"])]
            svg = svgplot.cdf_svg(series, "Spend per interest: %s, %s" % (group, mode),
                                  x_label="spend (USD)")
            csv_rows = []
            for leaning, values in series:
                n = len(values)
                for j, v in enumerate(values):
                    csv_rows.append([group, mode, leaning, _r(v), _r((j + 1) / n)])
            emit("spend_cdf_%s_%s" % (group.lower(), mode.lower()), svg,
                 ["group", "mode", "leaning", "spend_usd", "cdf"], csv_rows)
    else:
        result.skipped.append("spend_cdfs")

    fits = bundle.get("fits")
    if fits is not None:
        for entry in fits:
            points = [(p[0], p[1]) for p in entry["points"]]
            if points:
                lo = min(p[0] for p in points)
                hi = max(p[0] for p in points)
            else:
                lo, hi = -1.0, 1.0
            xs = [lo + (hi - lo) * i / 100.0 for i in range(101)]
            curve = list(zip(xs, sigmoid_response(xs, entry["intercept"],
                                                  entry["coefficient"]).tolist()))
            label = "2*sig(%.2f%+.2f*x)-1, R2=%.2f" % (
                entry["intercept"], entry["coefficient"], entry["r_squared"])
            svg = svgplot.curve_svg(points, curve,
                                    "Spend skew vs audience skew (%s)" % entry["mode"],
                                    x_label="audience skew", y_label="spend skew",
                                    curve_label=label)
            csv_rows = [["point", _r(x), _r(y)] for x, y in points]
            csv_rows += [["curve", _r(x), _r(y)] for x, y in curve]
            emit("fit_curve_%s" % entry["mode"].lower(), svg,
                 ["kind", "audience_skew", "spend_skew"], csv_rows)
    else:
        result.skipped.append("fits")

    pruning = bundle.get("pruning")
    if pruning is not None:
        coverage_pts = [(float(p["k"]), p["coverage"]) for p in pruning]
        corr_pts = [(float(p["k"]), p["pearson_r"]) for p in pruning
                    if p.get("pearson_r") is not None]
        svg = svgplot.line_svg([("coverage", coverage_pts), ("pearson r", corr_pts)],
                               "Top-domain pruning trade-off",
                               x_label="domains dropped", y_label="value")
        csv_rows = [[p["k"], _r(p["coverage"]), _r(p.get("pearson_r")), p["n_joint"]]
                    for p in pruning]
        emit("pruning_curve", svg, ["k", "coverage", "pearson_r", "n_joint"], csv_rows)
    else:
        result.skipped.append("pruning")

    return result


def write_manifest(out_dir, command: str, config_echo: dict,
                   inputs: Dict[str, str], output_names: List[str]) -> str:
    """Write manifest.json referencing every output with a content hash."""
    from . import __version__

    outputs = {}
    for name in sorted(set(output_names)):
        path = os.path.join(out_dir, name)
        outputs[name] = sha256_file(path)
    manifest = {
        "toolkit_version": __version__,
        "command": command,
        "config": config_echo,
        "inputs": inputs,
        "outputs": outputs,
    }
    path = os.path.join(out_dir, "manifest.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return path
