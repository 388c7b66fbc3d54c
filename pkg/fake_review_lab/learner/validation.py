"""
Repeated stratified k-fold cross-validation.

Repeat ``r`` partitions the data with ``derive_seed(seed, r)``; fold ``f`` of repeat
``r`` trains with ``derive_seed(seed, r, f)``. Folds run in parallel but are
aggregated in (repeat, fold) order, so results never depend on the worker count.
"""

import logging
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np
from joblib import Parallel, delayed

from fake_review_lab.errors import InsufficientSamplesError, ParameterError
from fake_review_lab.featurizer import preprocess_global, preprocess_split
from fake_review_lab.learner.metrics import (
    ConfusionMatrix,
    Metrics,
    MetricSummary,
    auc_roc,
    evaluate,
    summarize,
)
from fake_review_lab.learner.model_spec import ModelSpec, predict_score, train_model
from fake_review_lab.utils import derive_rng, derive_seed

logger = logging.getLogger(__name__)

PreprocessScope = Literal["fold", "global"]


@dataclass(frozen=True)
class CVConfig:
    """
    Attributes
    ----------
    folds: int, default = 10
    repeats: int, default = 30
    seed: int, default = 0
    preprocess_scope: {"fold", "global"}, default = "fold"
        ``fold`` fits the scaler on each training part; ``global`` preprocesses the
        whole dataset once before splitting.
    threshold: float, default = 0.5
    workers: int, default = 1
    """

    folds: int = 10
    repeats: int = 30
    seed: int = 0
    preprocess_scope: PreprocessScope = "fold"
    threshold: float = 0.5
    workers: int = 1

    # Folds are always stratified.
    stratified: bool = True

    def __post_init__(self) -> None:
        if self.folds < 2:
            raise ParameterError(f"folds must be >= 2, got {self.folds}.")
        if self.repeats < 1:
            raise ParameterError(f"repeats must be >= 1, got {self.repeats}.")
        if self.preprocess_scope not in ("fold", "global"):
            raise ParameterError(f"Unknown preprocess scope '{self.preprocess_scope}'.")


@dataclass(frozen=True)
class FoldResult:
    repeat: int
    fold: int
    confusion: ConfusionMatrix
    metrics: Metrics


@dataclass(frozen=True)
class CVResult:
    summary: MetricSummary
    folds: tuple[FoldResult, ...]

    def score(self, metric: str) -> Optional[float]:
        return self.summary.mean[metric]


def stratified_folds(
    y: np.ndarray, k: int, rng: np.random.Generator
) -> list[np.ndarray]:
    """
    Partition row indices into ``k`` test folds preserving the class ratio.

    Each class is shuffled and cut into ``k`` near-equal chunks; fold ``j`` takes chunk
    ``j`` of every class. Indices inside a fold are sorted.

    Raises
    ------
    InsufficientSamplesError
        If a class has fewer than ``k`` samples.
    """
    y = np.asarray(y)
    chunks: list[list[np.ndarray]] = [[] for _ in range(k)]
    for cls in (0, 1):
        members = np.nonzero(y == cls)[0]
        if len(members) < k:
            raise InsufficientSamplesError(
                f"Class {cls} has {len(members)} samples, fewer than {k} folds."
            )
        for fold, chunk in enumerate(np.array_split(rng.permutation(members), k)):
            chunks[fold].append(chunk)
    return [np.sort(np.concatenate(parts)) for parts in chunks]


def _run_fold(
    X: np.ndarray,
    y: np.ndarray,
    test: np.ndarray,
    spec: ModelSpec,
    cv: CVConfig,
    repeat: int,
    fold: int,
) -> FoldResult:
    train_mask = np.ones(len(y), dtype=bool)
    train_mask[test] = False
    X_train, X_test = X[train_mask], X[test]
    if cv.preprocess_scope == "fold":
        X_train, X_test, _ = preprocess_split(X_train, X_test)

    fold_spec = spec.with_seed(derive_seed(cv.seed, repeat, fold))
    model = train_model(fold_spec, X_train, y[train_mask])
    scores = predict_score(model, X_test)
    confusion, metrics = evaluate(y[test], scores, cv.threshold)
    auc = auc_roc(y[test], scores)
    logger.debug(f"repeat {repeat} fold {fold}: {metrics}")
    return FoldResult(
        repeat,
        fold,
        confusion,
        Metrics(metrics.precision, metrics.recall, metrics.f1, metrics.accuracy, auc),
    )


def cross_validate(
    X: np.ndarray, y: np.ndarray, spec: ModelSpec, cv: CVConfig = CVConfig()
) -> CVResult:
    """
    Evaluate ``spec`` by repeated stratified k-fold cross-validation.

    Parameters
    ----------
    X: np.ndarray
        Raw (unpreprocessed) ``n x d`` features.
    y: np.ndarray
        1 for fake, 0 for regular.
    spec: ModelSpec
    cv: CVConfig

    Returns
    -------
    CVResult
        Per-fold results and their aggregate over ``folds * repeats`` folds.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y).astype(np.int64)
    if cv.preprocess_scope == "global":
        X, _ = preprocess_global(X)

    jobs = []
    for repeat in range(cv.repeats):
        partition = stratified_folds(y, cv.folds, derive_rng(cv.seed, repeat))
        jobs.extend((repeat, fold, test) for fold, test in enumerate(partition))

    if cv.workers > 1:
        folds = Parallel(n_jobs=cv.workers)(
            delayed(_run_fold)(X, y, test, spec, cv, repeat, fold)
            for repeat, fold, test in jobs
        )
    else:
        folds = [
            _run_fold(X, y, test, spec, cv, repeat, fold) for repeat, fold, test in jobs
        ]

    summary = summarize([(f.confusion, f.metrics) for f in folds])
    logger.info(
        f"{spec.algorithm}: {cv.repeats}x{cv.folds}-fold CV mean "
        f"auc={summary.mean['auc_roc']}, recall={summary.mean['recall']}"
    )
    return CVResult(summary, tuple(folds))


def compare_algorithms(
    X: np.ndarray, y: np.ndarray, specs: list[ModelSpec], cv: CVConfig = CVConfig()
) -> dict[str, CVResult]:
    """Cross-validate several algorithms on identical folds."""
    return {spec.algorithm: cross_validate(X, y, spec, cv) for spec in specs}
