"""Evaluation of one configuration for one hour.

Users flow down the chain with expected-value semantics (never rounded
between stages); each non-Off stage runs ``ceil(users / uc)`` replicas with a
floor of one so the service stays reachable. Emissions are the replica-hour
energy times the hour's carbon intensity.

Sums of per-version QoE and revenue use :func:`math.fsum`, which makes the
objective independent of microservice order and therefore exactly comparable
between configurations. Energy is accumulated left to right in chain order;
:class:`ConfigTable` repeats that exact operation sequence across all
configurations at once, so the scalar and vectorized paths agree bit for bit.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import ApplicationModel, Configuration, VersionSpec, config_space


@dataclass(frozen=True)
class DeploymentPlan:
    config: Configuration
    replicas: tuple[int, ...]
    users_in: tuple[float, ...]
    energy_wh: float
    emissions_g: float
    qoe_term: float
    rev_term: float
    objective: float
    feasible: bool


def propagate_users(app: ApplicationModel, config: Sequence[int], users0: float) -> list[float]:
    users_in = [float(users0)]
    for ms, idx in zip(app.microservices[:-1], config):
        users_in.append(users_in[-1] * ms.versions[idx].q)
    return users_in


def replicas_for(version: VersionSpec, users_in: float) -> int:
    if version.is_off:
        return 0
    return max(1, math.ceil(users_in / version.uc))


def rev_max(app: ApplicationModel) -> float:
    return math.fsum(max(v.rev for v in ms.versions) for ms in app.microservices)


def qoe_rev_terms(app: ApplicationModel, config: Sequence[int]) -> tuple[float, float]:
    """The hour-independent part of the objective: mean QoE and normalized revenue."""
    chosen = [ms.versions[i] for ms, i in zip(app.microservices, config)]
    qoe_term = math.fsum(v.qoe for v in chosen) / app.n_microservices
    top = rev_max(app)
    rev_term = math.fsum(v.rev for v in chosen) / top if top > 0 else 0.0
    return qoe_term, rev_term


def config_revenue(app: ApplicationModel, config: Sequence[int]) -> float:
    return math.fsum(ms.versions[i].rev for ms, i in zip(app.microservices, config))


def emissions_from_energy(energy_wh: float, ci: float) -> float:
    return energy_wh * ci / 1000.0


def evaluate_config(
    app: ApplicationModel, config: Sequence[int], users0: float, ci: float, budget_g: float
) -> DeploymentPlan:
    config = tuple(config)
    users_in = propagate_users(app, config, users0)
    replicas = []
    energy = 0.0
    for ms, idx, users in zip(app.microservices, config, users_in):
        version = ms.versions[idx]
        n = replicas_for(version, users)
        replicas.append(n)
        energy = energy + n * version.ed_watts
    emissions = emissions_from_energy(energy, ci)
    qoe_term, rev_term = qoe_rev_terms(app, config)
    return DeploymentPlan(
        config=config,
        replicas=tuple(replicas),
        users_in=tuple(users_in),
        energy_wh=energy,
        emissions_g=emissions,
        qoe_term=qoe_term,
        rev_term=rev_term,
        objective=app.alpha * qoe_term + app.beta * rev_term,
        feasible=emissions <= budget_g,
    )


class ConfigTable:
    """All configurations of an application as arrays, for exhaustive search.

    Rows follow :func:`config_space` order, so a smaller row index means a
    lexicographically smaller configuration.
    """

    def __init__(self, app: ApplicationModel):
        self.app = app
        self.configs = np.array(list(config_space(app)), dtype=np.intp).reshape(app.n_configs, app.n_microservices)
        terms = [qoe_rev_terms(app, c) for c in map(tuple, self.configs.tolist())]
        self.qoe_term = np.array([t[0] for t in terms])
        self.rev_term = np.array([t[1] for t in terms])
        self.objective = app.alpha * self.qoe_term + app.beta * self.rev_term
        self._q = []
        self._ed = []
        self._uc = []
        self._off = []
        for j, ms in enumerate(app.microservices):
            col = self.configs[:, j]
            self._q.append(np.array([v.q for v in ms.versions])[col])
            self._ed.append(np.array([v.ed_watts for v in ms.versions])[col])
            self._uc.append(np.array([v.uc or 1 for v in ms.versions], dtype=float)[col])
            self._off.append(np.array([v.is_off for v in ms.versions])[col])

    def __len__(self) -> int:
        return len(self.configs)

    def energy_wh(self, users0: float) -> np.ndarray:
        users = np.full(len(self), float(users0))
        energy = np.zeros(len(self))
        for j in range(self.app.n_microservices):
            n = np.maximum(1.0, np.ceil(users / self._uc[j]))
            n[self._off[j]] = 0.0
            energy = energy + n * self._ed[j]
            users = users * self._q[j]
        return energy

    def emissions_g(self, users0: float, ci: float) -> np.ndarray:
        return self.energy_wh(users0) * ci / 1000.0


@functools.lru_cache(maxsize=64)
def config_table(app: ApplicationModel) -> ConfigTable:
    return ConfigTable(app)
