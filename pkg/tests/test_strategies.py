import math
import random
from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import brute_force_select, random_app
from msbudget.engine import config_table
from msbudget.model import parse_application
from msbudget.strategies import (
    branch_and_bound_select,
    ca_select,
    default_ca_candidates,
    hp_config,
    hp_select,
    optimal_select,
    sca_configs,
    sca_select,
)

ALL_NORMAL = (1, 1, 1, 1, 0)
HP = (2, 1, 1, 2, 0)
ALL_LOW = (0, 0, 0, 0, 0)


@pytest.mark.parametrize(
    "budget, config, objective, emissions, violated",
    [
        (60, ALL_NORMAL, 0.95, 51.78, False),
        (20, ALL_LOW, 0.2, 19.77, False),
        (10, ALL_LOW, 0.2, 19.77, True),
    ],
)
@pytest.mark.parametrize("select", [optimal_select, branch_and_bound_select], ids=["os", "bnb"])
def test_os_examples(app_a, doc_a, select, budget, config, objective, emissions, violated):
    out = select(app_a, 20000, 300, budget)
    assert out.plan.config == config
    assert out.plan.objective == pytest.approx(objective, abs=1e-12)
    assert out.plan.emissions_g == pytest.approx(emissions, abs=1e-9)
    assert out.violated is violated
    oracle, oracle_violated = brute_force_select(doc_a, 20000, 300, budget)
    assert oracle["config"] == config and oracle_violated is violated


def test_hp(app_a):
    assert hp_config(app_a) == HP
    out = hp_select(app_a, 20000, 300, 115.4)
    assert out.plan.emissions_g == pytest.approx(211.08, abs=1e-9)
    assert out.violated
    assert out.plan.emissions_g / 115.4 == pytest.approx(1.829, abs=1e-3)
    slack = hp_select(app_a, 20000, 300, 10000)
    assert slack.plan == replace(out.plan, feasible=True)
    assert not slack.violated


def _flat(*versions_per_ms):
    mss = []
    for j, eds in enumerate(versions_per_ms):
        mss.append({
            "name": f"m{j}",
            "optional": False,
            "versions": [
                {"name": f"v{i}", "ed_watts": ed, "q": 1.0, "uc": 100, "qoe": 0.5, "rev": 0.0}
                for i, ed in enumerate(eds)
            ],
        })
    return parse_application({"name": "flat", "microservices": mss})


def test_hp_single_versions():
    app = _flat([5.0], [7.0])
    assert hp_config(app) == (0, 0)
    assert sca_configs(app) == ((0, 0), (0, 0), (0, 0))


def test_hp_ties_go_last():
    assert hp_config(_flat([5.0, 9.0, 9.0, 1.0])) == (2,)


def test_sca_configs(app_a):
    low, mid, high = sca_configs(app_a)
    assert low == ALL_LOW
    assert mid == ALL_NORMAL
    assert high == HP
    assert app_a.config_names(low) == ("Low Power", "Off", "Low Power", "Off", "Normal")


def test_sca_two_versions_mid_is_higher():
    assert sca_configs(_flat([20.0, 10.0])) == ((1,), (0,), (0,))


def test_sca_configs_sequential_in_power():
    rng = random.Random(3)
    for _ in range(50):
        _, app = random_app(rng, rng.randint(1, 6))
        low, mid, high = sca_configs(app)
        for ms, a, b, c in zip(app.microservices, low, mid, high):
            assert ms.versions[a].ed_watts <= ms.versions[b].ed_watts <= ms.versions[c].ed_watts


@pytest.mark.parametrize("budget, config, violated", [(60, ALL_NORMAL, False), (20, ALL_LOW, False), (10, ALL_LOW, True)])
def test_sca_select(app_a, budget, config, violated):
    out = sca_select(app_a, 20000, 300, budget)
    assert out.plan.config == config
    assert out.violated is violated


def test_ca_default_candidates(app_a):
    first, second, third = default_ca_candidates(app_a)
    assert app_a.config_names(first) == ("Normal", "Off", "Normal", "Off", "Normal")
    assert app_a.config_names(second) == ("Low Power", "Normal", "Low Power", "Normal", "Normal")
    assert app_a.config_names(third) == ("High Performance", "Off", "Normal", "Off", "Normal")


def test_ca_select_budget_60(app_a):
    out = ca_select(app_a, 20000, 300, 60)
    # second candidate: 13 + 13 + 13 + 39.9 + 39.9 = 118.8 Wh -> 35.64 g, objective 0.875
    assert out.plan.config == default_ca_candidates(app_a)[1]
    assert out.plan.emissions_g == pytest.approx(35.64, abs=1e-9)
    assert out.plan.objective == pytest.approx(0.875, abs=1e-12)
    assert not out.violated


def test_ca_select_all_infeasible(app_a):
    out = ca_select(app_a, 20000, 300, 1.0)
    assert out.violated
    # candidate emissions: 35.91 g, 35.64 g, 115.56 g
    assert out.plan.config == default_ca_candidates(app_a)[1]
    assert out.plan.emissions_g == pytest.approx(35.64, abs=1e-9)


def test_ca_select_equal_candidates(app_a):
    out = ca_select(app_a, 20000, 300, 60, [ALL_NORMAL] * 3)
    assert out.plan.config == ALL_NORMAL


def test_ca_select_rejects_bad_candidates(app_a):
    with pytest.raises(ValueError):
        ca_select(app_a, 20000, 300, 60, [(9, 0, 0, 0, 0)])
    with pytest.raises(ValueError):
        ca_select(app_a, 20000, 300, 60, [(0, 0)])


hour = st.tuples(st.floats(0, 40000), st.floats(50, 600), st.floats(0, 400))


@settings(max_examples=150, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), inputs=hour, coarse=st.booleans())
def test_oracle_equivalence_random_apps(seed, inputs, coarse):
    rng = random.Random(seed)
    doc, app = random_app(rng, rng.randint(1, 5), coarse=coarse)
    users0, ci, budget = inputs
    oracle, violated = brute_force_select(doc, users0, ci, budget)
    for select in (optimal_select, branch_and_bound_select):
        out = select(app, users0, ci, budget)
        assert out.plan.config == oracle["config"]
        assert out.violated is violated
        assert abs(out.plan.objective - oracle["objective"]) <= 1e-12


@settings(max_examples=150, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), inputs=hour)
def test_dominance_over_baselines(seed, inputs):
    rng = random.Random(seed)
    _, app = random_app(rng, rng.randint(1, 5))
    users0, ci, budget = inputs
    best = optimal_select(app, users0, ci, budget)
    for baseline in (sca_select(app, users0, ci, budget), ca_select(app, users0, ci, budget)):
        if not baseline.violated:
            assert not best.violated
            assert best.plan.objective >= baseline.plan.objective


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), users0=st.floats(0, 40000), ci=st.floats(50, 600),
       budgets=st.lists(st.floats(0, 400), min_size=2, max_size=6))
def test_os_monotone_in_budget(seed, users0, ci, budgets):
    rng = random.Random(seed)
    _, app = random_app(rng, rng.randint(1, 5))
    values = [optimal_select(app, users0, ci, b) for b in sorted(budgets)]
    feasible = [o.plan.objective for o in values if not o.violated]
    assert feasible == sorted(feasible)
    flags = [o.violated for o in values]
    assert flags == sorted(flags, reverse=True)


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), inputs=hour, power=st.integers(-6, 6))
def test_argmax_invariant_under_common_scaling(seed, inputs, power):
    rng = random.Random(seed)
    _, app = random_app(rng, rng.randint(1, 5))
    users0, ci, budget = inputs
    c = 2.0**power
    assert optimal_select(app, users0, ci, budget).plan.config == optimal_select(app, users0, ci * c, budget * c).plan.config


def test_strategies_pure(app_a):
    for select in (optimal_select, branch_and_bound_select, hp_select, sca_select, ca_select):
        assert select(app_a, 12345.6, 321.0, 70.0) == select(app_a, 12345.6, 321.0, 70.0)


def test_degraded_mode_picks_min_emissions():
    rng = random.Random(8)
    for _ in range(30):
        doc, app = random_app(rng, rng.randint(1, 5))
        out = optimal_select(app, 10000, 300, 0.0)
        emissions = config_table(app).emissions_g(10000, 300)
        assert out.violated == (emissions.min() > 0)
        assert out.plan.emissions_g == emissions.min()
        assert branch_and_bound_select(app, 10000, 300, 0.0) == out


def test_zero_budget_with_all_off_feasible():
    doc = {
        "name": "opt",
        "microservices": [{"name": "a", "optional": True, "versions": [
            {"name": "Off", "ed_watts": 0.0, "q": 1.0, "qoe": 0.0, "rev": 0.0},
            {"name": "On", "ed_watts": 5.0, "q": 1.0, "uc": 10, "qoe": 1.0, "rev": 0.0},
        ]}],
    }
    app = parse_application(doc)
    out = optimal_select(app, 100, 300, 0.0)
    assert out.plan.config == (0,) and not out.violated
    # On needs 10 replicas: 50 Wh -> 15 g
    assert math.isclose(optimal_select(app, 100, 300, 15.0).plan.objective, 0.5)
    assert optimal_select(app, 100, 300, 14.9).plan.config == (0,)
