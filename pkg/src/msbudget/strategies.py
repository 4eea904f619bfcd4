"""Hourly selection strategies.

``optimal_select`` (OS) searches every configuration for the best feasible
objective. ``branch_and_bound_select`` returns the same answer without
enumerating the whole space. ``hp_select``, ``sca_select`` and ``ca_select``
are the high-performance, sequential carbon-aware and simple carbon-aware
baselines.

Tie rule shared by OS and branch-and-bound: higher objective, then lower
emissions, then the lexicographically smaller configuration. When nothing
fits the budget, the minimum-emission configuration is deployed and flagged
as a violation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .engine import DeploymentPlan, config_table, emissions_from_energy, evaluate_config, rev_max
from .model import ApplicationModel, Configuration


@dataclass(frozen=True)
class StrategyOutcome:
    plan: DeploymentPlan
    violated: bool


def _outcome(app: ApplicationModel, config: Sequence[int], users0: float, ci: float, budget_g: float) -> StrategyOutcome:
    plan = evaluate_config(app, config, users0, ci, budget_g)
    return StrategyOutcome(plan, violated=plan.emissions_g > budget_g)


def optimal_select(app: ApplicationModel, users0: float, ci: float, budget_g: float) -> StrategyOutcome:
    table = config_table(app)
    emissions = table.emissions_g(users0, ci)
    feasible = emissions <= budget_g
    index = np.arange(len(table))
    if feasible.any():
        obj = np.where(feasible, table.objective, -np.inf)
        # lexsort: last key is primary
        best = np.lexsort((index, emissions, -obj))[0]
    else:
        best = np.lexsort((index, emissions))[0]
    return _outcome(app, tuple(table.configs[best].tolist()), users0, ci, budget_g)


class _BranchAndBound:
    """Depth-first search over version indices in lexicographic order.

    Bounds are exact with respect to floating point: optimistic QoE/revenue
    sums are fsum'd over larger reals, and the energy lower bound adds
    smaller terms in the same left-to-right order as the evaluator, and
    rounding is monotone in both cases.
    """

    def __init__(self, app: ApplicationModel, users0: float, ci: float, budget_g: float):
        self.app = app
        self.users0 = float(users0)
        self.ci = ci
        self.budget_g = budget_g
        mss = app.microservices
        self.n = len(mss)
        self.rev_max = rev_max(app)
        self.max_qoe = [max(v.qoe for v in ms.versions) for ms in mss]
        self.max_rev = [max(v.rev for v in ms.versions) for ms in mss]
        self.min_q = [min(v.q for v in ms.versions) for ms in mss]

    def _objective(self, qoes: list[float], revs: list[float]) -> float:
        qoe_term = math.fsum(qoes) / self.n
        rev_term = math.fsum(revs) / self.rev_max if self.rev_max > 0 else 0.0
        return self.app.alpha * qoe_term + self.app.beta * rev_term

    def _energy_lower_bound(self, depth: int, energy: float, users: float) -> float:
        # users reaching later stages shrink by at most the smallest q per stage
        for j in range(depth, self.n):
            ms = self.app.microservices[j]
            energy = energy + min(
                0.0 if v.is_off else max(1, math.ceil(users / v.uc)) * v.ed_watts for v in ms.versions
            )
            users = users * self.min_q[j]
        return energy

    def _search(self, maximize: bool) -> Configuration | None:
        best: Configuration | None = None
        best_obj = -math.inf
        best_em = math.inf
        chosen: list[int] = []
        qoes: list[float] = []
        revs: list[float] = []

        def visit(depth: int, energy: float, users: float) -> None:
            nonlocal best, best_obj, best_em
            if depth == self.n:
                em = emissions_from_energy(energy, self.ci)
                if maximize:
                    if em > self.budget_g:
                        return
                    obj = self._objective(qoes, revs)
                    if obj > best_obj or (obj == best_obj and em < best_em):
                        best, best_obj, best_em = tuple(chosen), obj, em
                elif em < best_em:
                    best, best_em = tuple(chosen), em
                return
            em_lb = emissions_from_energy(self._energy_lower_bound(depth, energy, users), self.ci)
            if maximize:
                if em_lb > self.budget_g:
                    return
                bound = self._objective(qoes + self.max_qoe[depth:], revs + self.max_rev[depth:])
                if bound < best_obj or (bound == best_obj and em_lb >= best_em):
                    return
            elif em_lb >= best_em:
                return
            ms = self.app.microservices[depth]
            for idx, v in enumerate(ms.versions):
                n = 0 if v.is_off else max(1, math.ceil(users / v.uc))
                chosen.append(idx)
                qoes.append(v.qoe)
                revs.append(v.rev)
                visit(depth + 1, energy + n * v.ed_watts, users * v.q)
                chosen.pop()
                qoes.pop()
                revs.pop()

        visit(0, 0.0, self.users0)
        return best

    def solve(self) -> StrategyOutcome:
        config = self._search(maximize=True)
        if config is None:
            config = self._search(maximize=False)
        return _outcome(self.app, config, self.users0, self.ci, self.budget_g)


def branch_and_bound_select(app: ApplicationModel, users0: float, ci: float, budget_g: float) -> StrategyOutcome:
    return _BranchAndBound(app, users0, ci, budget_g).solve()


def hp_config(app: ApplicationModel) -> Configuration:
    """Highest-power version of every microservice; ties go to the later version."""
    config = []
    for ms in app.microservices:
        top = max(v.ed_watts for v in ms.versions)
        config.append(max(i for i, v in enumerate(ms.versions) if v.ed_watts == top))
    return tuple(config)


def hp_select(app: ApplicationModel, users0: float, ci: float, budget_g: float) -> StrategyOutcome:
    return _outcome(app, hp_config(app), users0, ci, budget_g)


def sca_configs(app: ApplicationModel) -> tuple[Configuration, Configuration, Configuration]:
    """Low, mid and high configurations; each microservice's versions are
    ranked by power draw, and mid takes rank ``ceil((k - 1) / 2)``."""
    low, mid, high = [], [], []
    for ms in app.microservices:
        ranked = sorted(range(len(ms.versions)), key=lambda i: ms.versions[i].ed_watts)
        k = len(ranked)
        low.append(ranked[0])
        mid.append(ranked[math.ceil((k - 1) / 2)])
        high.append(ranked[-1])
    return tuple(low), tuple(mid), tuple(high)


def sca_select(app: ApplicationModel, users0: float, ci: float, budget_g: float) -> StrategyOutcome:
    low, mid, high = sca_configs(app)
    for config in (high, mid):
        outcome = _outcome(app, config, users0, ci, budget_g)
        if not outcome.violated:
            return outcome
    return _outcome(app, low, users0, ci, budget_g)


def default_ca_candidates(app: ApplicationModel) -> tuple[Configuration, Configuration, Configuration]:
    """Three non-sequential candidates.

    1. mandatory services at their mid version, optional ones Off;
    2. mandatory services at their lowest-power version, optional ones at
       their lowest-power running version;
    3. mandatory services at their highest-power version, optional ones Off.
    """
    low, mid, high = sca_configs(app)
    first, second, third = [], [], []
    for j, ms in enumerate(app.microservices):
        if ms.optional:
            off = next(i for i, v in enumerate(ms.versions) if v.is_off)
            running = sorted(
                (i for i, v in enumerate(ms.versions) if not v.is_off), key=lambda i: ms.versions[i].ed_watts
            )
            first.append(off)
            second.append(running[0] if running else off)
            third.append(off)
        else:
            first.append(mid[j])
            second.append(low[j])
            third.append(high[j])
    return tuple(first), tuple(second), tuple(third)


def ca_select(
    app: ApplicationModel,
    users0: float,
    ci: float,
    budget_g: float,
    candidates: Sequence[Sequence[int]] | None = None,
) -> StrategyOutcome:
    if candidates is None:
        candidates = default_ca_candidates(app)
    candidates = [app.check_config(c) for c in candidates]
    if not candidates:
        raise ValueError("ca_select needs at least one candidate configuration")
    outcomes = [_outcome(app, c, users0, ci, budget_g) for c in candidates]
    feasible = [o for o in outcomes if not o.violated]
    if feasible:
        # max() keeps the first of equal keys, i.e. candidate order
        return max(feasible, key=lambda o: (o.plan.objective, -o.plan.emissions_g))
    return min(outcomes, key=lambda o: o.plan.emissions_g)


Strategy = Callable[[ApplicationModel, float, float, float], StrategyOutcome]

STRATEGIES: dict[str, Strategy] = {
    "os": optimal_select,
    "bnb": branch_and_bound_select,
    "hp": hp_select,
    "sca": sca_select,
    "ca": ca_select,
}
