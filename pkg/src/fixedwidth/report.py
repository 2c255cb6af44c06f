"""Serialization of coverage reports as a text table, CSV or JSON.

All floating-point values are written with 6 significant digits.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

from .core import FixedWidthError
from .harness import CoverageReport, SettingSummary

__all__ = ["CSV_COLUMNS", "ReportError", "ReportIOError", "emit_report", "write_report",
           "csv_rows", "parse_csv"]

CSV_COLUMNS = ("rule", "epsilon", "parameter", "kind", "q", "coverage", "coverage_se",
               "mean_nstop", "sd_nstop", "capped", "truth")


class ReportError(FixedWidthError):
    pass


class ReportIOError(ReportError, OSError):
    pass


def _g(x) -> str:
    return "" if x is None else f"{x:.6g}"


def _eps_text(summary: SettingSummary) -> str:
    eps = summary.rule.epsilon
    return _g(eps) if isinstance(eps, float) else ""


def csv_rows(report: CoverageReport) -> list[dict[str, str]]:
    rows = []
    for s in report.settings:
        for p in s.parameters:
            rows.append({
                "rule": s.rule.kind, "epsilon": _g(p.epsilon), "parameter": p.id, "kind": p.kind,
                "q": _g(p.q), "coverage": _g(p.coverage), "coverage_se": _g(p.coverage_se),
                "mean_nstop": _g(s.mean_nstop), "sd_nstop": _g(s.sd_nstop),
                "capped": str(s.capped), "truth": _g(p.truth),
            })
        if s.region_scored is not None:
            rows.append({
                "rule": s.rule.kind, "epsilon": _eps_text(s), "parameter": "region",
                "kind": "region", "q": "", "coverage": _g(s.region_coverage),
                "coverage_se": _g(s.region_se), "mean_nstop": _g(s.mean_nstop),
                "sd_nstop": _g(s.sd_nstop), "capped": str(s.capped), "truth": "",
            })
    return rows


def _to_csv(report: CoverageReport) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(csv_rows(report))
    return buf.getvalue()


def parse_csv(text: str) -> list[dict]:
    """Read rows written by the CSV emitter back into typed values."""
    out = []
    for row in csv.DictReader(io.StringIO(text)):
        typed = {}
        for key in CSV_COLUMNS:
            value = row[key]
            if key in ("rule", "parameter", "kind"):
                typed[key] = value
            elif key == "capped":
                typed[key] = int(value)
            else:
                typed[key] = float(value) if value != "" else None
        out.append(typed)
    return out


def _round(x):
    return None if x is None else float(f"{x:.6g}")


def _to_json(report: CoverageReport) -> str:
    doc = {
        "sampler": report.sampler,
        "seed": report.seed,
        "replications": report.replications,
        "delta": _round(report.delta),
        "overall_confidence": _round(report.overall_confidence),
        "settings": [],
    }
    for s in report.settings:
        eps = s.rule.epsilon
        doc["settings"].append({
            "rule": s.rule.kind,
            "label": s.label,
            "epsilon": _round(eps) if isinstance(eps, float) else [_round(e) for e in eps],
            "delta": _round(s.rule.delta),
            "n_star": s.rule.n_star,
            "check_increment": s.rule.check_increment,
            "replications": s.replications,
            "capped": s.capped,
            "mean_nstop": _round(s.mean_nstop),
            "sd_nstop": _round(s.sd_nstop),
            "region": None if s.region_scored is None else {
                "coverage": _round(s.region_coverage), "coverage_se": _round(s.region_se),
                "covered": s.region_covered, "scored": s.region_scored,
            },
            "parameters": [{
                "id": p.id, "kind": p.kind, "q": _round(p.q), "epsilon": _round(p.epsilon),
                "truth": _round(p.truth), "coverage": _round(p.coverage),
                "coverage_se": _round(p.coverage_se), "covered": p.covered, "scored": p.scored,
            } for p in s.parameters],
        })
    return json.dumps(doc, indent=2) + "\n"


def _to_table(report: CoverageReport) -> str:
    """Rule rows, a ``Length (SD)`` column, then one coverage column per parameter."""
    header = ["", "Length (SD)"] + [p.id for p in report.settings[0].parameters]
    has_region = any(s.region_scored is not None for s in report.settings)
    if has_region:
        header.append("Region")
    lines = []
    for s in report.settings:
        length = "capped" if s.mean_nstop is None else f"{_g(s.mean_nstop)} ({_g(s.sd_nstop)})"
        row = [s.label, length] + [_g(p.coverage) if p.scored else "-" for p in s.parameters]
        if has_region:
            row.append(_g(s.region_coverage) if s.region_scored else "-")
        if s.capped:
            row[1] += f" [{s.capped} capped]"
        lines.append(row)
    widths = [max(len(r[i]) for r in [header] + lines) for i in range(len(header))]

    def fmt(r):
        return (r[0].ljust(widths[0]) + " | " + r[1].ljust(widths[1]) + " | "
                + " ".join(c.rjust(w) for c, w in zip(r[2:], widths[2:]))).rstrip()

    rule = "-" * len(fmt(header))
    title = (f"{report.sampler}: {report.replications} replications, "
             f"per-interval level {_g(1.0 - report.delta)}")
    if report.overall_confidence is not None:
        title += f" (joint {_g(report.overall_confidence)})"
    return "\n".join([title, fmt(header), rule] + [fmt(r) for r in lines]) + "\n"


_EMITTERS = {"table": _to_table, "csv": _to_csv, "json": _to_json}


def emit_report(report: CoverageReport, format: str = "table") -> str:
    if format not in _EMITTERS:
        raise ReportError(f"unknown report format {format!r}")
    if report.replications < 1 or not report.settings:
        raise ReportError("report has no replications; refusing to write an empty report")
    return _EMITTERS[format](report)


def write_report(report: CoverageReport, path: str | Path, format: str = "table") -> None:
    text = emit_report(report, format)
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise ReportIOError(f"cannot write report to {path}: {exc.strerror or exc}") from exc
