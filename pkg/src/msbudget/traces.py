"""Hourly carbon-intensity and workload traces, synthetic generators, and the
split of a horizon-wide carbon budget into hourly allowances."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

AllocationMode = Literal["proportional", "uniform"]

CARBON_HEADER = ("hour", "ci_g_per_kwh")
WORKLOAD_HEADER = ("hour", "users")

NOISE_FRACTION = 0.05
PERIOD_HOURS = 24


class TraceError(ValueError):
    pass


def _as_tuple(values: Sequence[float]) -> tuple[float, ...]:
    return tuple(float(v) for v in values)


@dataclass(frozen=True)
class CarbonTrace:
    """Grid carbon intensity in gCO2e/kWh for hours ``0 .. H-1``."""

    ci: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "ci", _as_tuple(self.ci))
        if not self.ci:
            raise TraceError("carbon trace is empty")
        for h, v in enumerate(self.ci):
            if not (math.isfinite(v) and v > 0):
                raise TraceError(f"carbon trace hour {h}: ci must be a positive number, got {v}")

    def __len__(self) -> int:
        return len(self.ci)


@dataclass(frozen=True)
class WorkloadTrace:
    """Users entering the application in each hour ``0 .. H-1``."""

    users: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "users", _as_tuple(self.users))
        if not self.users:
            raise TraceError("workload trace is empty")
        for h, v in enumerate(self.users):
            if not (math.isfinite(v) and v >= 0):
                raise TraceError(f"workload trace hour {h}: users must be >= 0, got {v}")

    def __len__(self) -> int:
        return len(self.users)


@dataclass(frozen=True)
class BudgetSchedule:
    total_g: float
    hourly_g: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "hourly_g", _as_tuple(self.hourly_g))
        if not (math.isfinite(self.total_g) and self.total_g > 0):
            raise TraceError(f"total budget must be a positive number, got {self.total_g}")
        if any(not (math.isfinite(g) and g >= 0) for g in self.hourly_g):
            raise TraceError("hourly budgets must be finite and >= 0")
        if not math.isclose(math.fsum(self.hourly_g), self.total_g, rel_tol=1e-9):
            raise TraceError(f"hourly budgets sum to {math.fsum(self.hourly_g)}, not the total {self.total_g}")

    def __len__(self) -> int:
        return len(self.hourly_g)


def allocate_budget(total_g: float, workload: WorkloadTrace, mode: AllocationMode = "proportional") -> BudgetSchedule:
    """Split ``total_g`` over the hours of ``workload``.

    ``proportional`` follows the expected workload, ``uniform`` gives every
    hour the same share.
    """
    if not (math.isfinite(total_g) and total_g > 0):
        raise TraceError(f"total budget must be a positive number, got {total_g}")
    users = workload.users
    if mode == "uniform":
        share = total_g / len(users)
        return BudgetSchedule(total_g, [share] * len(users))
    if mode != "proportional":
        raise TraceError(f"unknown allocation mode {mode!r}, expected 'proportional' or 'uniform'")
    total_users = math.fsum(users)
    if total_users <= 0:
        raise TraceError("proportional allocation needs a workload with at least one user")
    return BudgetSchedule(total_g, [total_g * (u / total_users) for u in users])


# --- synthetic traces ---------------------------------------------------------

def _diurnal(hours: int, base: float, amplitude: float, seed: int) -> np.ndarray:
    if hours < 1:
        raise TraceError(f"hours must be >= 1, got {hours}")
    if not (amplitude >= 0 and base > amplitude):
        raise TraceError(f"need base > amplitude >= 0, got base={base}, amplitude={amplitude}")
    h = np.arange(hours, dtype=float)
    values = base + amplitude * np.sin(2.0 * np.pi * h / PERIOD_HOURS)
    if amplitude > 0:
        rng = np.random.default_rng(seed)
        values = values + rng.uniform(-NOISE_FRACTION * base, NOISE_FRACTION * base, size=hours)
    # floor keeps the series strictly positive when amplitude is close to base
    return np.maximum(values, 1e-3 * base)


def gen_synthetic_carbon(hours: int, base: float, amplitude: float, seed: int) -> CarbonTrace:
    """Diurnal sinusoid (24 h period) around ``base`` with seeded uniform noise
    of up to 5% of ``base``. A zero amplitude gives a flat trace."""
    return CarbonTrace(_diurnal(hours, base, amplitude, seed).tolist())


def gen_synthetic_workload(hours: int, base: float, amplitude: float, seed: int) -> WorkloadTrace:
    """Same shape as :func:`gen_synthetic_carbon`, in users per hour."""
    return WorkloadTrace(_diurnal(hours, base, amplitude, seed).tolist())


# --- CSV ------------------------------------------------------------------------

def format_float(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.6f}"


def _read_series(text: str, header: tuple[str, str], source: str) -> list[float]:
    reader = csv.reader(io.StringIO(text))
    try:
        first = next(reader)
    except StopIteration:
        raise TraceError(f"{source}: empty file, expected header {','.join(header)}") from None
    if tuple(c.strip() for c in first) != header:
        raise TraceError(f"{source}:1: expected header {','.join(header)}, got {','.join(first)}")
    values = []
    for row in reader:
        line = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 2:
            raise TraceError(f"{source}:{line}: expected 2 columns, got {len(row)}")
        try:
            hour = int(row[0])
            value = float(row[1])
        except ValueError:
            raise TraceError(f"{source}:{line}: cannot parse {','.join(row)!r}") from None
        if hour != len(values):
            raise TraceError(f"{source}:{line}: expected hour {len(values)}, got {hour} (hours must be contiguous from 0)")
        if not math.isfinite(value):
            raise TraceError(f"{source}:{line}: {header[1]} must be finite, got {row[1]}")
        if header == CARBON_HEADER and value <= 0:
            raise TraceError(f"{source}:{line}: ci must be > 0, got {value}")
        if header == WORKLOAD_HEADER and value < 0:
            raise TraceError(f"{source}:{line}: users must be >= 0, got {value}")
        values.append(value)
    if not values:
        raise TraceError(f"{source}: no data rows")
    return values


def load_carbon_trace(path: str | Path) -> CarbonTrace:
    path = Path(path)
    return CarbonTrace(_read_series(path.read_text(encoding="utf-8"), CARBON_HEADER, str(path)))


def load_workload_trace(path: str | Path) -> WorkloadTrace:
    path = Path(path)
    return WorkloadTrace(_read_series(path.read_text(encoding="utf-8"), WORKLOAD_HEADER, str(path)))


def trace_to_csv(trace: CarbonTrace | WorkloadTrace) -> str:
    if isinstance(trace, CarbonTrace):
        header, values = CARBON_HEADER, trace.ci
    else:
        header, values = WORKLOAD_HEADER, trace.users
    lines = [",".join(header)]
    lines.extend(f"{h},{format_float(v)}" for h, v in enumerate(values))
    return "\n".join(lines) + "\n"


def save_trace(trace: CarbonTrace | WorkloadTrace, path: str | Path) -> None:
    Path(path).write_text(trace_to_csv(trace), encoding="utf-8")
