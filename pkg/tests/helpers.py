"""Brute-force oracle and random model builders shared by the tests.

The oracle works on plain dicts built straight from the JSON document, not on
the package's model or engine code.
"""
from __future__ import annotations

import itertools
import math
import random

from msbudget.model import ApplicationModel, parse_application


def brute_force_plan(doc: dict, chosen: tuple[int, ...], users0: float, ci: float) -> dict:
    """Evaluate one configuration by walking the chain by hand."""
    mss = doc["microservices"]
    users = users0
    energy = 0.0
    replicas = []
    qoes, revs = [], []
    for ms, idx in zip(mss, chosen):
        v = ms["versions"][idx]
        if v["ed_watts"] == 0:
            n = 0
        else:
            n = max(1, math.ceil(users / v["uc"]))
        replicas.append(n)
        energy += n * v["ed_watts"]
        qoes.append(v["qoe"])
        revs.append(v["rev"])
        users = users * v["q"]
    top = math.fsum(max(v["rev"] for v in ms["versions"]) for ms in mss)
    qoe_term = math.fsum(qoes) / len(mss)
    rev_term = math.fsum(revs) / top if top else 0.0
    alpha = doc.get("alpha", 0.5)
    beta = doc.get("beta", 0.5)
    return {
        "config": tuple(chosen),
        "replicas": replicas,
        "energy_wh": energy,
        "emissions_g": energy * ci / 1000.0,
        "objective": alpha * qoe_term + beta * rev_term,
    }


def brute_force_select(doc: dict, users0: float, ci: float, budget_g: float) -> tuple[dict, bool]:
    """Exhaustive argmax with the documented tie rule; returns (plan, violated)."""
    plans = [
        brute_force_plan(doc, c, users0, ci)
        for c in itertools.product(*(range(len(ms["versions"])) for ms in doc["microservices"]))
    ]
    feasible = [p for p in plans if p["emissions_g"] <= budget_g]
    if feasible:
        best = feasible[0]
        for p in feasible[1:]:
            if p["objective"] > best["objective"] or (
                p["objective"] == best["objective"] and p["emissions_g"] < best["emissions_g"]
            ):
                best = p
        return best, False
    best = plans[0]
    for p in plans[1:]:
        if p["emissions_g"] < best["emissions_g"]:
            best = p
    return best, True


def brute_force_min_emissions(doc: dict, users0: float, ci: float) -> float:
    return min(
        brute_force_plan(doc, c, users0, ci)["emissions_g"]
        for c in itertools.product(*(range(len(ms["versions"])) for ms in doc["microservices"]))
    )


def random_app_doc(rng: random.Random, n_ms: int, max_versions: int = 4, coarse: bool = False) -> dict:
    """Random valid application document.

    ``coarse`` draws values from small grids so ties in objective and
    emissions are common.
    """
    mss = []
    for j in range(n_ms):
        optional = rng.random() < 0.4
        k = rng.randint(2 if optional else 1, max_versions)
        versions = []
        if optional:
            versions.append({"name": "Off", "ed_watts": 0.0, "q": rng.choice([0.5, 0.75, 0.9, 1.0]), "qoe": 0.0, "rev": 0.0})
        while len(versions) < k:
            if coarse:
                v = {
                    "ed_watts": rng.choice([10.0, 20.0, 40.0]),
                    "q": rng.choice([0.5, 1.0]),
                    "uc": rng.choice([1000, 5000, 20000]),
                    "qoe": rng.choice([0.0, 0.5, 1.0]),
                    "rev": rng.choice([0.0, 1.0]),
                }
            else:
                v = {
                    "ed_watts": round(rng.uniform(1, 400), 1),
                    "q": round(rng.uniform(0.3, 1.0), 3),
                    "uc": rng.randint(500, 25000),
                    "qoe": round(rng.uniform(0, 1), 3),
                    "rev": round(rng.uniform(0, 3), 2) if rng.random() < 0.5 else 0.0,
                }
            v["name"] = f"v{len(versions)}"
            versions.append(v)
        rng.shuffle(versions)
        mss.append({"name": f"ms{j}", "optional": optional, "versions": versions})
    return {
        "name": "random",
        "alpha": rng.choice([0.0, 0.3, 0.5, 1.0]) if not coarse else 0.5,
        "beta": rng.choice([0.2, 0.5, 0.7]),
        "microservices": mss,
    }


def random_app(rng: random.Random, n_ms: int, max_versions: int = 4, coarse: bool = False) -> tuple[dict, ApplicationModel]:
    doc = random_app_doc(rng, n_ms, max_versions, coarse)
    return doc, parse_application(doc)
