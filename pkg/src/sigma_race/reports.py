"""JSON and CSV serialization of report values.

Integers are written in full; the race margin is a decimal string because
it is a 128-bit quantity. Floats carry 12 significant digits, so a JSON
round trip reproduces a report up to that rounding.
"""
from __future__ import annotations

import csv
import io
import json
from fractions import Fraction
from typing import Any, Dict, List, Sequence

from .congruence import BetaReport, EulerConstant, RaceModulus, SeriesTruncation
from .race import (
    Direction,
    EnvelopeReport,
    PointwiseScanReport,
    ResidualSample,
    TheoremCertificate,
    WeightedBoundReport,
    WeightedBoundRow,
)

SIG_DIGITS = 12


def fmt_float(v: float) -> float:
    return float(f"{v:.{SIG_DIGITS}g}")


def _csv_cell(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.{SIG_DIGITS}g}"
    if v is None:
        return ""
    return str(v)


def _sample_dict(s: ResidualSample) -> Dict[str, Any]:
    return {
        "x": s.x,
        "normalized_sum": fmt_float(s.normalized_sum),
        "beta_term": fmt_float(s.beta_term),
        "residual": fmt_float(s.residual),
        "envelope_lo": fmt_float(s.envelope_lo),
        "envelope_hi": fmt_float(s.envelope_hi),
        "pass": s.passes,
    }


def _row_dict(r: WeightedBoundRow) -> Dict[str, Any]:
    return {
        "x": r.x,
        "k": r.k,
        "base_sum": r.base_sum,
        "lower_bound": fmt_float(r.lower_bound),
        "offset_sum": r.offset_sum,
        "upper_bound": fmt_float(r.upper_bound),
        "crossover_gap": fmt_float(r.crossover_gap),
        "lower_holds": r.lower_holds,
        "upper_holds": r.upper_holds,
        "crossover_holds": r.crossover_holds,
    }


def to_dict(report) -> Dict[str, Any]:
    if isinstance(report, TheoremCertificate):
        return {
            "q": report.modulus.q,
            "k": report.modulus.k,
            "k_max": report.k_max,
            "verified": report.verified,
            "min_margin": str(report.min_margin),
            "argmin_k": report.argmin_k,
            "elapsed_ms": report.elapsed_ms,
        }
    if isinstance(report, EnvelopeReport):
        return {
            "q": report.modulus.q,
            "k": report.modulus.k,
            "all_pass": report.all_pass,
            "worst_slack": fmt_float(report.worst_slack),
            "samples": [_sample_dict(s) for s in report.samples],
        }
    if isinstance(report, WeightedBoundReport):
        return {"all_pass": report.all_pass, "rows": [_row_dict(r) for r in report.rows]}
    if isinstance(report, BetaReport):
        return {
            "q": report.modulus.q,
            "k": report.modulus.k,
            "coefficient_num": report.constant.numerator,
            "coefficient_den": report.constant.denominator,
            "numeric": fmt_float(report.constant.numeric),
            "depth": report.series.depth,
            "series_partial": fmt_float(report.series.partial),
            "tail_bound": fmt_float(report.series.tail_bound),
            "within_tail": report.within_tail,
        }
    if isinstance(report, PointwiseScanReport):
        return {
            "function": report.function_id,
            "q": report.q,
            "k": report.k,
            "direction": report.direction.value,
            "limit": report.limit,
            "violation_count": report.violation_count,
            "first_violation": report.first_violation,
            "violations": list(report.violations),
        }
    if hasattr(report, "to_dict"):
        return report.to_dict()
    raise TypeError(f"cannot serialize {type(report).__name__}")


def from_dict(data: Dict[str, Any], kind: type):
    """Rebuild a report of type ``kind`` from its JSON dictionary."""
    if kind is TheoremCertificate:
        return TheoremCertificate(
            RaceModulus(data["q"], data["k"]),
            data["k_max"],
            data["verified"],
            int(data["min_margin"]),
            data["argmin_k"],
            data["elapsed_ms"],
        )
    if kind is EnvelopeReport:
        samples = tuple(
            ResidualSample(
                s["x"], s["normalized_sum"], s["beta_term"], s["residual"], s["envelope_lo"], s["envelope_hi"]
            )
            for s in data["samples"]
        )
        return EnvelopeReport(RaceModulus(data["q"], data["k"]), samples, data["all_pass"], data["worst_slack"])
    if kind is WeightedBoundReport:
        rows = tuple(
            WeightedBoundRow(
                r["x"], r["k"], r["base_sum"], r["lower_bound"], r["offset_sum"], r["upper_bound"], r["crossover_gap"]
            )
            for r in data["rows"]
        )
        return WeightedBoundReport(rows, data["all_pass"])
    if kind is BetaReport:
        m = RaceModulus(data["q"], data["k"])
        return BetaReport(
            m,
            EulerConstant(Fraction(data["coefficient_num"], data["coefficient_den"]), data["numeric"]),
            SeriesTruncation(m, data["depth"], data["series_partial"], data["tail_bound"]),
        )
    if kind is PointwiseScanReport:
        return PointwiseScanReport(
            data["function"],
            data["q"],
            data["k"],
            Direction(data["direction"]),
            data["limit"],
            data["violation_count"],
            data["first_violation"],
            tuple(data["violations"]),
        )
    raise TypeError(f"cannot deserialize {kind.__name__}")


def dumps_json(report) -> str:
    if isinstance(report, (list, tuple)):
        payload: Any = [to_dict(r) for r in report]
    else:
        payload = to_dict(report)
    return json.dumps(payload, indent=2) + "\n"


def loads_json(text: str, kind: type):
    data = json.loads(text)
    if isinstance(data, list):
        return [from_dict(d, kind) for d in data]
    return from_dict(data, kind)


def csv_rows(report) -> List[Dict[str, Any]]:
    """Flat rows for CSV output; nested reports expand to one row per entry."""
    if isinstance(report, EnvelopeReport):
        return [_sample_dict(s) for s in report.samples]
    if isinstance(report, WeightedBoundReport):
        return [_row_dict(r) for r in report.rows]
    row = to_dict(report)
    if isinstance(report, PointwiseScanReport):
        row["violations"] = " ".join(str(v) for v in report.violations)
    return [row]


def dumps_csv(report) -> str:
    reports: Sequence = report if isinstance(report, (list, tuple)) else [report]
    rows = [row for r in reports for row in csv_rows(r)]
    buf = io.StringIO(newline="")
    if not rows:
        return ""
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(rows[0].keys())
    for row in rows:
        writer.writerow(_csv_cell(v) for v in row.values())
    return buf.getvalue()


def write_report(report, fmt: str = "json", output: str | None = None) -> str:
    """Serialize ``report`` (or a list of reports) and write it to ``output``, if given."""
    if fmt == "json":
        text = dumps_json(report)
    elif fmt == "csv":
        text = dumps_csv(report)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if output and output != "-":
        with open(output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return text
