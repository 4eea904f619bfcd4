"""CSV encodings of simulation output.

Floats carry 6 fractional digits and infinities are written as ``inf`` so
repeated runs produce byte-identical files.
"""
from __future__ import annotations

import csv
import io
import math
from pathlib import Path
from typing import Iterable, Sequence

from .sim import ComparisonRow, HourRecord, SimulationReport, StrategySummary
from .traces import format_float

HOURLY_COLUMNS = (
    "hour", "strategy", "config", "replicas", "energy_wh", "emissions_g", "budget_g",
    "utilization", "qoe", "revenue", "objective", "violated",
)
SUMMARY_COLUMNS = (
    "strategy", "hours", "total_emissions_g", "total_budget_g", "mean_utilization",
    "violations", "mean_qoe", "total_revenue", "mean_objective",
)
COMPARISON_COLUMNS = (
    "strategy_a", "strategy_b", "qoe_delta_pct", "revenue_delta_pct", "objective_delta_pct",
    "violations_a", "violations_b",
)


def _render(header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _bool(flag: bool) -> str:
    return "true" if flag else "false"


def hourly_csv(records: Iterable[HourRecord]) -> str:
    f = format_float
    return _render(
        HOURLY_COLUMNS,
        (
            (
                str(r.hour), r.strategy, ";".join(r.config), ";".join(map(str, r.replicas)),
                f(r.energy_wh), f(r.emissions_g), f(r.budget_g), f(r.utilization),
                f(r.qoe_term), f(r.revenue), f(r.objective), _bool(r.violated),
            )
            for r in records
        ),
    )


def summary_csv(summaries: Iterable[StrategySummary]) -> str:
    f = format_float
    return _render(
        SUMMARY_COLUMNS,
        (
            (
                s.strategy, str(s.hours), f(s.total_emissions_g), f(s.total_budget_g),
                f(s.mean_utilization), str(s.violations), f(s.mean_qoe), f(s.total_revenue),
                f(s.mean_objective),
            )
            for s in summaries
        ),
    )


def comparison_csv(rows: Iterable[ComparisonRow]) -> str:
    f = format_float
    return _render(
        COMPARISON_COLUMNS,
        (
            (
                c.strategy_a, c.strategy_b, f(c.qoe_delta_pct), f(c.revenue_delta_pct),
                f(c.objective_delta_pct), str(c.violations_a), str(c.violations_b),
            )
            for c in rows
        ),
    )


def summaries_from_hourly_csv(text: str, source: str = "hourly csv") -> tuple[StrategySummary, ...]:
    """Aggregate a per-hour CSV written by :func:`hourly_csv`.

    Works on the rounded values in the file, so totals can differ from the
    in-memory report in the last printed digit.
    """
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != HOURLY_COLUMNS:
        raise ValueError(f"{source}: expected header {','.join(HOURLY_COLUMNS)}")
    acc: dict[str, list[list[float]]] = {}
    for row in reader:
        try:
            values = [
                float(row["emissions_g"]), float(row["budget_g"]), float(row["utilization"]),
                float(row["qoe"]), float(row["revenue"]), float(row["objective"]),
                {"true": 1.0, "false": 0.0}[row["violated"]],
            ]
        except (KeyError, ValueError, TypeError):
            raise ValueError(f"{source}:{reader.line_num}: malformed row") from None
        acc.setdefault(row["strategy"], []).append(values)
    out = []
    for name, rows in acc.items():
        cols = list(zip(*rows))
        n = len(rows)
        out.append(
            StrategySummary(
                strategy=name,
                hours=n,
                total_emissions_g=math.fsum(cols[0]),
                total_budget_g=math.fsum(cols[1]),
                mean_utilization=math.fsum(cols[2]) / n,
                violations=int(sum(cols[6])),
                mean_qoe=math.fsum(cols[3]) / n,
                total_revenue=math.fsum(cols[4]),
                mean_objective=math.fsum(cols[5]) / n,
            )
        )
    return tuple(out)


def write_atomic(path: str | Path, text: str) -> None:
    path = Path(path)
    tmp = path.with_name(f".{path.name}.tmp")
    tmp.write_text(text, encoding="utf-8")
    tmp.replace(path)


def write_report(report: SimulationReport, out_dir: str | Path) -> tuple[Path, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    hourly = hourly_csv(report.records)
    summary = summary_csv(report.summaries)
    hourly_path, summary_path = out_dir / "hourly.csv", out_dir / "summary.csv"
    write_atomic(hourly_path, hourly)
    write_atomic(summary_path, summary)
    return hourly_path, summary_path
