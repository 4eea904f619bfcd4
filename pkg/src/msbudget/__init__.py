"""Carbon-budgeted version and scaleout selection for microservice chains."""
from .engine import DeploymentPlan, evaluate_config, propagate_users, replicas_for, rev_max
from .estimators import BudgetedSelector
from .model import (
    ApplicationModel,
    Configuration,
    Microservice,
    VersionSpec,
    config_space,
    load_application,
    parse_application,
)
from .sim import SimulationReport, compare, run_simulation
from .strategies import (
    StrategyOutcome,
    branch_and_bound_select,
    ca_select,
    hp_select,
    optimal_select,
    sca_configs,
    sca_select,
)
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

__version__ = "0.1.0"
