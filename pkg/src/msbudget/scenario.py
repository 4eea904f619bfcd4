"""Scenario files: one JSON document naming the application, the traces (CSV
paths or synthetic-generator parameters), the budget and the strategies.

Relative paths resolve against the scenario file's directory. A path of the
form ``bundled:<name>`` refers to a file shipped in the package's data
directory, e.g. ``bundled:flight_booking_a.json``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Any, Mapping, Sequence

from .engine import evaluate_config
from .model import ApplicationModel, Configuration, load_application
from .strategies import STRATEGIES, hp_config, sca_configs
from .traces import (
    BudgetSchedule,
    CarbonTrace,
    WorkloadTrace,
    allocate_budget,
    gen_synthetic_carbon,
    gen_synthetic_workload,
    load_carbon_trace,
    load_workload_trace,
)

BUNDLED_PREFIX = "bundled:"
BUDGET_RULES = ("midpoint",)
ALLOC_MODES = ("proportional", "uniform")

_FIELDS = {"application", "carbon", "workload", "budget", "alloc", "strategies", "alpha", "beta",
           "carryover", "ca_candidates"}
_REQUIRED = {"application", "carbon", "workload", "budget"}
_SYNTH_FIELDS = {"hours", "base", "amplitude", "seed"}


class ScenarioError(ValueError):
    pass


def resolve_path(value: str | Path, base_dir: Path | None = None) -> Path:
    text = str(value)
    if text.startswith(BUNDLED_PREFIX):
        name = text[len(BUNDLED_PREFIX):]
        path = Path(str(resources.files("msbudget") / "data" / name))
        if not path.is_file():
            raise ScenarioError(f"no bundled file named {name!r}")
        return path
    path = Path(text)
    if base_dir is not None and not path.is_absolute():
        path = base_dir / path
    return path


@dataclass(frozen=True)
class SyntheticTrace:
    hours: int
    base: float
    amplitude: float
    seed: int


TraceSource = Path | SyntheticTrace


@dataclass(frozen=True)
class Scenario:
    application: Path
    carbon: TraceSource
    workload: TraceSource
    budget: float | str
    alloc: str = "proportional"
    strategies: tuple[str, ...] = ("os", "hp", "sca", "ca")
    alpha: float | None = None
    beta: float | None = None
    carryover: bool = False
    ca_candidates: tuple[tuple[str, ...], ...] | None = field(default=None)

    def __post_init__(self) -> None:
        if isinstance(self.budget, str):
            if self.budget not in BUDGET_RULES:
                raise ScenarioError(f"budget: expected a number of grams or one of {list(BUDGET_RULES)}, got {self.budget!r}")
        elif not (math.isfinite(self.budget) and self.budget > 0):
            raise ScenarioError(f"budget: must be a positive number of grams, got {self.budget}")
        if self.alloc not in ALLOC_MODES:
            raise ScenarioError(f"alloc: expected one of {list(ALLOC_MODES)}, got {self.alloc!r}")
        if not self.strategies:
            raise ScenarioError("strategies: at least one strategy is required")
        bad = [s for s in self.strategies if s not in STRATEGIES]
        if bad:
            raise ScenarioError(f"strategies: unknown {bad}, expected names from {sorted(STRATEGIES)}")
        if len(set(self.strategies)) != len(self.strategies):
            raise ScenarioError(f"strategies: duplicates in {list(self.strategies)}")
        for key in ("alpha", "beta"):
            v = getattr(self, key)
            if v is not None and not (math.isfinite(v) and v >= 0):
                raise ScenarioError(f"{key}: must be a non-negative number, got {v}")

    def with_seed(self, seed: int) -> Scenario:
        """Reseed synthetic traces: carbon gets ``seed``, workload ``seed + 1``."""
        carbon, workload = self.carbon, self.workload
        if isinstance(carbon, SyntheticTrace):
            carbon = replace(carbon, seed=seed)
        if isinstance(workload, SyntheticTrace):
            workload = replace(workload, seed=seed + 1)
        return replace(self, carbon=carbon, workload=workload)

    def load_application(self) -> ApplicationModel:
        if not self.application.is_file():
            raise ScenarioError(f"application: file not found: {self.application}")
        return load_application(self.application).with_weights(self.alpha, self.beta)

    def carbon_trace(self) -> CarbonTrace:
        if isinstance(self.carbon, SyntheticTrace):
            s = self.carbon
            return gen_synthetic_carbon(s.hours, s.base, s.amplitude, s.seed)
        if not self.carbon.is_file():
            raise ScenarioError(f"carbon: file not found: {self.carbon}")
        return load_carbon_trace(self.carbon)

    def workload_trace(self) -> WorkloadTrace:
        if isinstance(self.workload, SyntheticTrace):
            s = self.workload
            return gen_synthetic_workload(s.hours, s.base, s.amplitude, s.seed)
        if not self.workload.is_file():
            raise ScenarioError(f"workload: file not found: {self.workload}")
        return load_workload_trace(self.workload)

    def candidate_configs(self, app: ApplicationModel) -> list[Configuration] | None:
        if self.ca_candidates is None:
            return None
        return [app.config_from_names(names) for names in self.ca_candidates]

    def schedule(self, app: ApplicationModel, carbon: CarbonTrace, workload: WorkloadTrace) -> BudgetSchedule:
        total = midpoint_budget(app, carbon, workload) if self.budget == "midpoint" else float(self.budget)
        return allocate_budget(total, workload, self.alloc)


def midpoint_budget(app: ApplicationModel, carbon: CarbonTrace, workload: WorkloadTrace) -> float:
    """Total budget halfway between running the high-performance configuration
    and the lowest-power configuration over the whole horizon."""
    high = hp_config(app)
    low = sca_configs(app)[0]
    if len(carbon) != len(workload):
        raise ScenarioError(f"trace lengths differ: carbon {len(carbon)}, workload {len(workload)}")
    per_hour = []
    for ci, users in zip(carbon.ci, workload.users):
        hi = evaluate_config(app, high, users, ci, math.inf).emissions_g
        lo = evaluate_config(app, low, users, ci, math.inf).emissions_g
        per_hour.append((hi + lo) / 2.0)
    return math.fsum(per_hour)


def _trace_source(value: Any, key: str, base_dir: Path | None) -> TraceSource:
    if isinstance(value, str):
        return resolve_path(value, base_dir)
    if isinstance(value, Mapping):
        unknown = sorted(set(value) - _SYNTH_FIELDS)
        missing = sorted(_SYNTH_FIELDS - set(value))
        if unknown or missing:
            raise ScenarioError(f"{key}: generator needs exactly {sorted(_SYNTH_FIELDS)} (unknown {unknown}, missing {missing})")
        for k in _SYNTH_FIELDS:
            if isinstance(value[k], bool) or not isinstance(value[k], (int, float)):
                raise ScenarioError(f"{key}.{k}: must be a number, got {value[k]!r}")
        if not isinstance(value["hours"], int) or not isinstance(value["seed"], int):
            raise ScenarioError(f"{key}: hours and seed must be integers")
        return SyntheticTrace(value["hours"], float(value["base"]), float(value["amplitude"]), value["seed"])
    raise ScenarioError(f"{key}: expected a CSV path or generator parameters, got {value!r}")


def parse_scenario(doc: Mapping[str, Any], base_dir: Path | None = None) -> Scenario:
    if not isinstance(doc, Mapping):
        raise ScenarioError("scenario: expected a JSON object")
    unknown = sorted(set(doc) - _FIELDS)
    if unknown:
        raise ScenarioError(f"scenario: unknown field(s) {unknown}")
    missing = sorted(_REQUIRED - set(doc))
    if missing:
        raise ScenarioError(f"scenario: missing field(s) {missing}")
    if not isinstance(doc["application"], str):
        raise ScenarioError("application: expected a path string")
    budget = doc["budget"]
    if isinstance(budget, bool) or not isinstance(budget, (int, float, str)):
        raise ScenarioError(f"budget: expected grams or a rule name, got {budget!r}")
    kwargs: dict[str, Any] = {}
    if "alloc" in doc:
        kwargs["alloc"] = doc["alloc"]
    if "strategies" in doc:
        kwargs["strategies"] = parse_strategies(doc["strategies"])
    for key in ("alpha", "beta"):
        if doc.get(key) is not None:
            if isinstance(doc[key], bool) or not isinstance(doc[key], (int, float)):
                raise ScenarioError(f"{key}: must be a number, got {doc[key]!r}")
            kwargs[key] = float(doc[key])
    if "carryover" in doc:
        if not isinstance(doc["carryover"], bool):
            raise ScenarioError(f"carryover: must be true or false, got {doc['carryover']!r}")
        kwargs["carryover"] = doc["carryover"]
    if doc.get("ca_candidates") is not None:
        cands = doc["ca_candidates"]
        if not isinstance(cands, list) or not cands or not all(
            isinstance(c, list) and all(isinstance(n, str) for n in c) for c in cands
        ):
            raise ScenarioError("ca_candidates: expected a non-empty list of version-name lists")
        kwargs["ca_candidates"] = tuple(tuple(c) for c in cands)
    return Scenario(
        application=resolve_path(doc["application"], base_dir),
        carbon=_trace_source(doc["carbon"], "carbon", base_dir),
        workload=_trace_source(doc["workload"], "workload", base_dir),
        budget=float(budget) if not isinstance(budget, str) else budget,
        **kwargs,
    )


def parse_strategies(value: Any) -> tuple[str, ...]:
    if isinstance(value, str):
        value = [s.strip() for s in value.split(",") if s.strip()]
    if not isinstance(value, Sequence) or not all(isinstance(s, str) for s in value):
        raise ScenarioError(f"strategies: expected a list of names, got {value!r}")
    return tuple(s.lower() for s in value)


def load_scenario(path: str | Path) -> Scenario:
    path = resolve_path(path)
    if not path.is_file():
        raise ScenarioError(f"scenario: file not found: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario: {path} is not valid JSON: {exc}") from None
    return parse_scenario(doc, path.parent)

