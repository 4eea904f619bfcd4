"""scikit-learn style front end to the selection strategies.

Each row of ``X`` is one hour: ``[users0, ci_g_per_kwh, budget_g]``.
``predict`` returns the chosen version index per microservice and
``transform`` the evaluated metrics, so a selector can sit at the end of a
pipeline that forecasts the three hourly inputs.
"""
from __future__ import annotations

from pathlib import Path
from typing import Mapping

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .engine import rev_max
from .model import ApplicationModel, load_application, parse_application
from .strategies import STRATEGIES, StrategyOutcome, ca_select, default_ca_candidates, sca_configs

HOUR_FEATURES = ("users0", "ci_g_per_kwh", "budget_g")
METRIC_COLUMNS = ("energy_wh", "emissions_g", "qoe_term", "rev_term", "objective", "violated")


def check_hour_inputs(X) -> np.ndarray:
    """Validate an ``(n_hours, 3)`` array of hourly inputs."""
    X = check_array(X, dtype=np.float64, ensure_2d=True)
    if X.shape[1] != len(HOUR_FEATURES):
        raise ValueError(f"expected {len(HOUR_FEATURES)} columns {HOUR_FEATURES}, got {X.shape[1]}")
    if (X[:, 0] < 0).any():
        raise ValueError("users0 must be >= 0")
    if (X[:, 1] <= 0).any():
        raise ValueError("ci_g_per_kwh must be > 0")
    if (X[:, 2] < 0).any():
        raise ValueError("budget_g must be >= 0")
    return X


def check_application(application) -> ApplicationModel:
    if isinstance(application, ApplicationModel):
        return application
    if isinstance(application, Mapping):
        return parse_application(application)
    if isinstance(application, (str, Path)):
        return load_application(application)
    raise TypeError(f"application must be an ApplicationModel, a mapping or a path, got {type(application).__name__}")


class BudgetedSelector(TransformerMixin, BaseEstimator):
    """Pick one configuration per hour with a named strategy.

    Parameters
    ----------
    application : ApplicationModel, mapping or path
        The annotated application.
    strategy : {"os", "bnb", "hp", "sca", "ca"}
    alpha, beta : float, optional
        Override the application's objective weights.
    ca_candidates : list of version-name lists, optional
        Candidate configurations for ``strategy="ca"``.
    """

    def __init__(self, application=None, strategy="os", alpha=None, beta=None, ca_candidates=None):
        self.application = application
        self.strategy = strategy
        self.alpha = alpha
        self.beta = beta
        self.ca_candidates = ca_candidates

    def fit(self, X=None, y=None):
        if self.application is None:
            raise ValueError("application is required")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}, expected one of {sorted(STRATEGIES)}")
        if X is not None:
            check_hour_inputs(X)
        app = check_application(self.application).with_weights(self.alpha, self.beta)
        self.app_ = app
        self.n_microservices_ = app.n_microservices
        self.n_configs_ = app.n_configs
        self.rev_max_ = rev_max(app)
        self.sca_configs_ = sca_configs(app)
        if self.ca_candidates is None:
            self.ca_candidates_ = default_ca_candidates(app)
        else:
            self.ca_candidates_ = tuple(app.config_from_names(c) for c in self.ca_candidates)
        return self

    def select(self, X) -> list[StrategyOutcome]:
        check_is_fitted(self, "app_")
        X = check_hour_inputs(X)
        out = []
        for users0, ci, budget_g in X.tolist():
            if self.strategy == "ca":
                out.append(ca_select(self.app_, users0, ci, budget_g, self.ca_candidates_))
            else:
                out.append(STRATEGIES[self.strategy](self.app_, users0, ci, budget_g))
        return out

    def predict(self, X) -> np.ndarray:
        """Version index per microservice, shape ``(n_hours, n_microservices)``."""
        outcomes = self.select(X)
        return np.array([o.plan.config for o in outcomes], dtype=np.intp).reshape(-1, self.n_microservices_)

    def transform(self, X) -> np.ndarray:
        """Metrics per hour, columns as in ``METRIC_COLUMNS``."""
        rows = []
        for o in self.select(X):
            p = o.plan
            rows.append((p.energy_wh, p.emissions_g, p.qoe_term, p.rev_term, p.objective, float(o.violated)))
        return np.array(rows, dtype=np.float64).reshape(-1, len(METRIC_COLUMNS))

    def score(self, X, y=None) -> float:
        """Mean objective over the hours in ``X``."""
        return float(self.transform(X)[:, METRIC_COLUMNS.index("objective")].mean())

    def get_feature_names_out(self, input_features=None):
        return np.array(METRIC_COLUMNS, dtype=object)
