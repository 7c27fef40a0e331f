"""CSV / JSON emission for test outcomes and experiment reports."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

from .montecarlo import ExperimentReport

POWER_COLUMNS = ["design", "s", "h", "reps", "power", "se"]


def _clean(value):
    """Non-finite floats become None so nothing NaN-like reaches a report."""
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def _csv_text(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: ("" if _clean(v) is None else v) for k, v in row.items()})
    return buf.getvalue()


def report_columns(report: ExperimentReport) -> list[str]:
    rows = report.rows()
    if report.kind == "power":
        extra = [c for c in rows[0] if c not in POWER_COLUMNS] if rows else []
        return POWER_COLUMNS + extra
    return list(rows[0]) if rows else ["design", "s", "h", "reps"]


def report_csv(report: ExperimentReport) -> str:
    return _csv_text(report.rows(), report_columns(report))


def report_dict(report: ExperimentReport) -> dict:
    cells = []
    for row, cell in zip(report.rows(), report.cells):
        rec = {k: _clean(v) for k, v in row.items()}
        if cell.z_scores:
            rec["z_scores"] = [_clean(z) for z in cell.z_scores]
        cells.append(rec)
    return {"experiment": report.kind, "seed": report.seed,
            "config": {k: _clean(v) for k, v in report.config.items()}, "cells": cells}


def report_json(report: ExperimentReport) -> str:
    return json.dumps(report_dict(report), indent=2, allow_nan=False) + "\n"


def write_report(report: ExperimentReport, base: str | Path) -> tuple[Path, Path]:
    base = Path(base)
    if base.suffix in (".csv", ".json"):
        base = base.with_suffix("")
    base.parent.mkdir(parents=True, exist_ok=True)
    csv_path, json_path = base.with_suffix(".csv"), base.with_suffix(".json")
    csv_path.write_text(report_csv(report))
    json_path.write_text(report_json(report))
    return csv_path, json_path


def outcome_text(record: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps({k: _clean(v) for k, v in record.items()}, indent=2, allow_nan=False) + "\n"
    return _csv_text([record], list(record))


def summary_table(report: ExperimentReport) -> str:
    """Designs across, sparsity (or h) down, like the published tables."""
    designs = list(dict.fromkeys(c.design for c in report.cells))
    by_row = "h" if report.kind == "power" else "s"
    keys = list(dict.fromkeys(getattr(c, by_row) for c in report.cells))
    lookup = {(c.design, getattr(c, by_row)): c for c in report.cells}

    def fmt(c):
        if c is None or c.failed:
            return "failed"
        if report.kind == "coverage":
            return f"{c.coverage:.3f} / {c.mean_ci_length:.3f}"
        return f"{c.rejection_rate:.3f}"

    head = {"size": "rejection rate", "power": "power", "coverage": "coverage / mean length"}[report.kind]
    width = max(14, *(len(d) for d in designs)) + 2
    lines = [f"{report.kind} experiment ({head})",
             f"{by_row:>8}" + "".join(f"{d:>{width}}" for d in designs)]
    for k in keys:
        label = f"{k:g}" if isinstance(k, float) else str(k)
        lines.append(f"{label:>8}" + "".join(f"{fmt(lookup.get((d, k))):>{width}}" for d in designs))
    return "\n".join(lines)
