"""
Recursive feature elimination and exhaustive grid search, both scored by
cross-validation.
"""

import itertools
import logging
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from typing import Any, Optional

import numpy as np

from fake_review_lab.errors import ParameterError, UnsupportedModelError
from fake_review_lab.learner.forest import ForestParams
from fake_review_lab.learner.importance import feature_importance
from fake_review_lab.learner.metrics import METRIC_NAMES
from fake_review_lab.learner.model_spec import ModelSpec, fit_classifier
from fake_review_lab.learner.tree import TreeParams
from fake_review_lab.learner.validation import CVConfig, cross_validate

logger = logging.getLogger(__name__)

RFECV_TOLERANCE = 0.005

DEFAULT_GRID: dict[str, list[Any]] = {
    "n_estimators": [100, 300, 500],
    "max_depth": [10, 30, None],
    "max_features": ["sqrt", "all"],
    "criterion": ["gini"],
}


def _check_scoring(scoring: str) -> None:
    if scoring not in METRIC_NAMES:
        raise ParameterError(f"Unknown scoring metric '{scoring}'.")


@dataclass(frozen=True)
class RFECVStep:
    n_features: int
    features: tuple[int, ...]
    score: Optional[float]


@dataclass(frozen=True)
class RFECVResult:
    selected: tuple[int, ...]
    curve: tuple[RFECVStep, ...]


def rfecv(
    X: np.ndarray,
    y: np.ndarray,
    spec: ModelSpec,
    cv: CVConfig = CVConfig(),
    scoring: str = "precision",
    tolerance: float = RFECV_TOLERANCE,
) -> RFECVResult:
    """
    Recursive feature elimination with cross-validation.

    Starting from all features, each round scores the current set by cross-validation,
    retrains on all data and drops the least important feature (ties: the highest
    column index), down to a single feature.

    Returns
    -------
    RFECVResult
        ``selected`` is the smallest feature set scoring within ``tolerance`` of the
        best score; ``curve`` has one step per feature count, largest first.

    Raises
    ------
    UnsupportedModelError
        For Naive Bayes, which has no importances.
    """
    _check_scoring(scoring)
    if spec.algorithm == "nb":
        raise UnsupportedModelError("RFECV needs a tree or forest model.")
    X = np.asarray(X, dtype=np.float64)
    if X.shape[1] < 2:
        raise ParameterError("RFECV needs at least two features.")

    active = list(range(X.shape[1]))
    curve: list[RFECVStep] = []
    while True:
        score = cross_validate(X[:, active], y, spec, cv).score(scoring)
        curve.append(RFECVStep(len(active), tuple(active), score))
        logger.info(f"RFECV {len(active)} features: {scoring}={score}")
        if len(active) == 1:
            break
        fitted = fit_classifier(
            spec.with_seed(cv.seed), X, y, features=tuple(active), workers=cv.workers
        )
        importances = feature_importance(fitted.model).values
        lowest = float(importances.min())
        drop = max(
            position
            for position, value in enumerate(importances)
            if value == lowest
        )
        del active[drop]

    defined = [step.score for step in curve if step.score is not None]
    if not defined:
        return RFECVResult(curve[0].features, tuple(curve))
    best = max(defined)
    within = [
        step
        for step in curve
        if step.score is not None and step.score >= best - tolerance
    ]
    chosen = min(within, key=lambda step: step.n_features)
    return RFECVResult(tuple(sorted(chosen.features)), tuple(curve))


def expand_grid(grid: Mapping[str, Sequence[Any]]) -> list[ForestParams]:
    """Every combination of a parameter lattice, as forest parameters."""
    allowed = {
        "n_estimators",
        "max_depth",
        "max_features",
        "criterion",
        "min_samples_split",
    }
    unknown = set(grid) - allowed
    if unknown:
        raise ParameterError(f"Unknown grid parameters {sorted(unknown)}.")
    if not grid or any(len(values) == 0 for values in grid.values()):
        raise ParameterError("The grid must be non-empty.")

    names = sorted(grid)
    params = []
    for combination in itertools.product(*(grid[name] for name in names)):
        values = dict(zip(names, combination))
        tree = TreeParams(
            criterion=values.get("criterion", "gini"),
            max_depth=values.get("max_depth"),
            max_features=values.get("max_features", "sqrt"),
            min_samples_split=values.get("min_samples_split", 2),
        )
        params.append(
            ForestParams(n_estimators=values.get("n_estimators", 100), tree=tree)
        )
    return params


def params_row(params: ForestParams) -> dict[str, Any]:
    return {
        "n_estimators": params.n_estimators,
        "max_depth": params.tree.max_depth,
        "max_features": params.tree.max_features,
        "criterion": params.tree.criterion,
        "min_samples_split": params.tree.min_samples_split,
    }


def _tie_key(params: ForestParams) -> tuple[int, float, str]:
    depth = params.tree.max_depth
    return (
        params.n_estimators,
        math.inf if depth is None else float(depth),
        f"{params.tree.criterion}|{params.tree.max_features}|"
        f"{params.tree.min_samples_split}",
    )


@dataclass(frozen=True)
class GridSearchResult:
    best_params: ForestParams
    best_score: Optional[float]
    table: list[dict[str, Any]]


def grid_search(
    X: np.ndarray,
    y: np.ndarray,
    grid: Mapping[str, Sequence[Any]] = DEFAULT_GRID,
    cv: CVConfig = CVConfig(),
    scoring: str = "precision",
) -> GridSearchResult:
    """
    Cross-validate every random forest configuration of ``grid``.

    The best configuration has the highest mean ``scoring``; ties go to fewer trees,
    then the shallower depth (unlimited counts as deepest), then the lexicographically
    smaller remaining parameters.

    Returns
    -------
    GridSearchResult
        ``table`` has one row per configuration in evaluation order with its
        parameters and mean metrics.
    """
    _check_scoring(scoring)
    candidates = expand_grid(grid)
    table = []
    scored: list[tuple[float, ForestParams, Optional[float]]] = []
    for params in candidates:
        result = cross_validate(X, y, ModelSpec("rf", params), cv)
        score = result.score(scoring)
        table.append({**params_row(params), **result.summary.mean})
        scored.append((-score if score is not None else math.inf, params, score))
        logger.info(f"Grid {params_row(params)}: {scoring}={score}")

    _, best_params, best_score = min(
        scored, key=lambda item: (item[0], _tie_key(item[1]))
    )
    return GridSearchResult(best_params, best_score, table)
