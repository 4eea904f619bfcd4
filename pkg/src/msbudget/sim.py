"""Hour-by-hour simulation of selection strategies over carbon and workload
traces, plus the pairwise comparison table."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .engine import config_revenue
from .model import ApplicationModel, Configuration
from .strategies import STRATEGIES, ca_select
from .traces import BudgetSchedule, CarbonTrace, WorkloadTrace


def utilization(emissions_g: float, budget_g: float) -> float:
    if budget_g > 0:
        return emissions_g / budget_g
    return math.inf if emissions_g > 0 else 0.0


@dataclass(frozen=True)
class HourRecord:
    hour: int
    strategy: str
    config: tuple[str, ...]
    replicas: tuple[int, ...]
    energy_wh: float
    emissions_g: float
    budget_g: float
    utilization: float
    qoe_term: float
    rev_term: float
    revenue: float
    objective: float
    users0: float
    completers: float
    violated: bool


@dataclass(frozen=True)
class StrategySummary:
    strategy: str
    hours: int
    total_emissions_g: float
    total_budget_g: float
    mean_utilization: float
    violations: int
    mean_qoe: float
    total_revenue: float
    mean_objective: float


@dataclass(frozen=True)
class SimulationReport:
    records: tuple[HourRecord, ...]
    summaries: tuple[StrategySummary, ...]

    def summary(self, strategy: str) -> StrategySummary:
        for s in self.summaries:
            if s.strategy == strategy:
                return s
        raise KeyError(strategy)

    def records_for(self, strategy: str) -> list[HourRecord]:
        return [r for r in self.records if r.strategy == strategy]


def summarize(records: Iterable[HourRecord], order: Sequence[str] | None = None) -> tuple[StrategySummary, ...]:
    """Per-strategy aggregates, recomputed from the rows alone."""
    by_strategy: dict[str, list[HourRecord]] = {}
    for r in records:
        by_strategy.setdefault(r.strategy, []).append(r)
    names = list(order) if order is not None else list(by_strategy)
    out = []
    for name in names:
        rows = by_strategy.get(name, [])
        n = len(rows)
        if not n:
            continue
        out.append(
            StrategySummary(
                strategy=name,
                hours=n,
                total_emissions_g=math.fsum(r.emissions_g for r in rows),
                total_budget_g=math.fsum(r.budget_g for r in rows),
                mean_utilization=math.fsum(r.utilization for r in rows) / n,
                violations=sum(r.violated for r in rows),
                mean_qoe=math.fsum(r.qoe_term for r in rows) / n,
                total_revenue=math.fsum(r.revenue for r in rows),
                mean_objective=math.fsum(r.objective for r in rows) / n,
            )
        )
    return tuple(out)


def _record(app: ApplicationModel, hour: int, name: str, outcome, users0: float, budget_g: float) -> HourRecord:
    plan = outcome.plan
    last = app.microservices[-1].versions[plan.config[-1]]
    return HourRecord(
        hour=hour,
        strategy=name,
        config=app.config_names(plan.config),
        replicas=plan.replicas,
        energy_wh=plan.energy_wh,
        emissions_g=plan.emissions_g,
        budget_g=budget_g,
        utilization=utilization(plan.emissions_g, budget_g),
        qoe_term=plan.qoe_term,
        rev_term=plan.rev_term,
        revenue=config_revenue(app, plan.config),
        objective=plan.objective,
        users0=users0,
        completers=plan.users_in[-1] * last.q,
        violated=outcome.violated,
    )


def run_simulation(
    app: ApplicationModel,
    carbon: CarbonTrace,
    workload: WorkloadTrace,
    schedule: BudgetSchedule,
    strategies: Sequence[str] = ("os",),
    *,
    ca_candidates: Sequence[Configuration] | None = None,
    carryover: bool = False,
) -> SimulationReport:
    """Run every strategy on every hour.

    With ``carryover`` each strategy keeps its own unused allowance, which is
    added to the next hour's budget; overshoots are not charged back.
    Records are ordered by (hour, position in ``strategies``).
    """
    lengths = {len(carbon), len(workload), len(schedule)}
    if len(lengths) != 1:
        raise ValueError(
            f"trace lengths differ: carbon {len(carbon)}, workload {len(workload)}, budget {len(schedule)}"
        )
    unknown = [s for s in strategies if s not in STRATEGIES]
    if unknown:
        raise ValueError(f"unknown strategies {unknown}, expected a subset of {sorted(STRATEGIES)}")
    if len(set(strategies)) != len(strategies):
        raise ValueError(f"duplicate strategies in {list(strategies)}")

    def select(name: str, users0: float, ci: float, budget_g: float):
        if name == "ca":
            return ca_select(app, users0, ci, budget_g, ca_candidates)
        return STRATEGIES[name](app, users0, ci, budget_g)

    bank = {name: 0.0 for name in strategies}
    records = []
    for hour, (ci, users0, allowance) in enumerate(zip(carbon.ci, workload.users, schedule.hourly_g)):
        for name in strategies:
            budget_g = allowance + bank[name] if carryover else allowance
            outcome = select(name, users0, ci, budget_g)
            records.append(_record(app, hour, name, outcome, users0, budget_g))
            if carryover:
                bank[name] = max(0.0, budget_g - outcome.plan.emissions_g)
    return SimulationReport(tuple(records), summarize(records, strategies))


@dataclass(frozen=True)
class ComparisonRow:
    strategy_a: str
    strategy_b: str
    qoe_delta_pct: float
    revenue_delta_pct: float
    objective_delta_pct: float
    violations_a: int
    violations_b: int


def pct_delta(a: float, b: float) -> float:
    """Relative change of ``a`` over baseline ``b`` in percent; ``inf`` when the
    baseline is zero and ``a`` is not."""
    if b == 0:
        if a == 0:
            return 0.0
        return math.inf if a > 0 else -math.inf
    return (a - b) / abs(b) * 100.0


def compare(report: SimulationReport | Iterable[StrategySummary]) -> list[ComparisonRow]:
    """One row per strategy pair, in the order strategies were simulated;
    ``strategy_b`` is the baseline of each delta."""
    summaries: Sequence[StrategySummary] = (
        report.summaries if isinstance(report, SimulationReport) else tuple(report)
    )
    rows = []
    for a, b in itertools.combinations(summaries, 2):
        rows.append(
            ComparisonRow(
                strategy_a=a.strategy,
                strategy_b=b.strategy,
                qoe_delta_pct=pct_delta(a.mean_qoe, b.mean_qoe),
                revenue_delta_pct=pct_delta(a.total_revenue, b.total_revenue),
                objective_delta_pct=pct_delta(a.mean_objective, b.mean_objective),
                violations_a=a.violations,
                violations_b=b.violations,
            )
        )
    return rows

