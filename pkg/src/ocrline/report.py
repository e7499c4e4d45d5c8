"""Presentation of evaluation results: per-language metric tables, error
tables, and multi-model comparisons against a designated baseline.

Rendered tables show percentages rounded half-up to two decimals; CSV and
JSON carry full precision.  JSON output is byte-stable: emit -> parse ->
emit reproduces the exact bytes.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from typing import Optional

from .align import ErrorSegment, ErrorTableRow
from .errors import DataError
from .metrics import MetricValues

METRIC_COLUMNS = (("cer", "CER"), ("wer", "WER"), ("f1", "F1"))


@dataclass
class EvalReport:
    """Evaluation result for one model: per-group metrics plus error table."""

    model_name: str
    groups: dict[str, MetricValues]
    error_table: list[ErrorTableRow] = field(default_factory=list)
    pair_count: int = 1
    created: Optional[str] = None

    def __post_init__(self):
        if "overall" not in self.groups:
            raise DataError("report groups must contain an 'overall' entry")
        if self.pair_count <= 0:
            raise DataError("pair_count must be positive")


@dataclass
class Comparison:
    """Ordered multi-model comparison with an optional baseline."""

    reports: list[EvalReport]
    baseline_name: Optional[str] = None

    def __post_init__(self):
        names = [r.model_name for r in self.reports]
        if len(set(names)) != len(names):
            raise DataError("model names in a comparison must be unique")
        if self.baseline_name is not None and self.baseline_name not in names:
            raise DataError(f"baseline {self.baseline_name!r} is not among the reports")

    def column_order(self) -> list[str]:
        """Model names in insertion order with the baseline moved last."""
        names = [r.model_name for r in self.reports if r.model_name != self.baseline_name]
        if self.baseline_name is not None:
            names.append(self.baseline_name)
        return names

    def report(self, name: str) -> EvalReport:
        for r in self.reports:
            if r.model_name == name:
                return r
        raise DataError(f"no report named {name!r}")


def format_percent(value: float) -> str:
    """Fraction as a percentage with half-up rounding to two decimals."""
    return str(Decimal(repr(value * 100)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def _group_order(c: Comparison) -> list[str]:
    groups = {"overall"}
    for r in c.reports:
        groups.update(r.groups)
    return ["overall"] + sorted(groups - {"overall"})


def emit_markdown(c: Comparison) -> str:
    """GitHub-flavored table, one row per (metric, group), best value bold."""
    columns = c.column_order()
    lines = [
        "| Metric | Group | " + " | ".join(columns) + " |",
        "| --- | --- | " + " | ".join("---" for _ in columns) + " |",
    ]
    for key, label in METRIC_COLUMNS:
        for group in _group_order(c):
            values: list[Optional[float]] = []
            for name in columns:
                mv = c.report(name).groups.get(group)
                values.append(getattr(mv, key) if mv is not None else None)
            defined = [v for v in values if v is not None]
            best = None
            if defined:
                best = max(defined) if key == "f1" else min(defined)
            cells = []
            for v in values:
                if v is None:
                    cells.append("—")
                elif v == best:
                    cells.append(f"**{format_percent(v)}**")
                else:
                    cells.append(format_percent(v))
            lines.append(f"| {label} | {group} | " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def emit_csv(c: Comparison) -> str:
    """RFC 4180 CSV with a header row; values at full precision."""
    columns = c.column_order()
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\r\n")
    writer.writerow(["metric", "group"] + columns)
    for key, label in METRIC_COLUMNS:
        for group in _group_order(c):
            row = [label, group]
            for name in columns:
                mv = c.report(name).groups.get(group)
                value = getattr(mv, key) if mv is not None else None
                row.append("" if value is None else repr(value))
            writer.writerow(row)
    return buffer.getvalue()


def _metric_values_to_dict(mv: MetricValues) -> dict:
    return {"cer": mv.cer, "wer": mv.wer, "f1": mv.f1, "mean_cer_wer": mv.mean_cer_wer}


def _metric_values_from_dict(data: dict) -> MetricValues:
    return MetricValues(cer=data["cer"], wer=data["wer"], f1=data.get("f1"))


def _row_to_dict(row: ErrorTableRow) -> dict:
    return {
        "ref": row.segment.ref_str,
        "hyp": row.segment.hyp_str,
        "n_e": row.n_e,
        "n_m": row.n_m,
        "n_c": row.n_c,
    }


def _row_from_dict(data: dict) -> ErrorTableRow:
    return ErrorTableRow(
        segment=ErrorSegment(data["ref"], data["hyp"]),
        n_e=data["n_e"],
        n_m=data.get("n_m"),
        n_c=data.get("n_c"),
    )


def report_to_dict(report: EvalReport) -> dict:
    return {
        "model_name": report.model_name,
        "pair_count": report.pair_count,
        "created": report.created,
        "groups": {g: _metric_values_to_dict(mv) for g, mv in report.groups.items()},
        "error_table": [_row_to_dict(r) for r in report.error_table],
    }


def report_from_dict(data: dict) -> EvalReport:
    return EvalReport(
        model_name=data["model_name"],
        groups={g: _metric_values_from_dict(mv) for g, mv in data["groups"].items()},
        error_table=[_row_from_dict(r) for r in data.get("error_table", [])],
        pair_count=data.get("pair_count", 1),
        created=data.get("created"),
    )


def emit_report_json(report: EvalReport) -> str:
    return json.dumps(report_to_dict(report), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def parse_report_json(text: str) -> EvalReport:
    try:
        return report_from_dict(json.loads(text))
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise DataError(f"invalid report JSON: {exc}") from exc


def emit_json(c: Comparison) -> str:
    payload = {
        "baseline_name": c.baseline_name,
        "reports": [report_to_dict(r) for r in c.reports],
    }
    return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def parse_json(text: str) -> Comparison:
    try:
        data = json.loads(text)
        return Comparison(
            reports=[report_from_dict(r) for r in data["reports"]],
            baseline_name=data.get("baseline_name"),
        )
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise DataError(f"invalid comparison JSON: {exc}") from exc


def improvement_factors(c: Comparison) -> dict[tuple[str, str], float]:
    """Baseline-over-model ratio for CER and WER, per non-baseline model.

    A zero model value yields ``math.inf``.  Requires a baseline with
    strictly positive CER and WER.
    """
    if c.baseline_name is None:
        raise DataError("improvement_factors requires a baseline")
    baseline = c.report(c.baseline_name).groups["overall"]
    factors: dict[tuple[str, str], float] = {}
    for metric in ("cer", "wer"):
        baseline_value = getattr(baseline, metric)
        if baseline_value <= 0:
            raise DataError(f"baseline {metric} must be > 0")
        for report in c.reports:
            if report.model_name == c.baseline_name:
                continue
            model_value = getattr(report.groups["overall"], metric)
            factors[(report.model_name, metric)] = (
                math.inf if model_value == 0 else baseline_value / model_value
            )
    return factors
