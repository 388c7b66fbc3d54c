"""
Fake-review classifiers built on numpy: Gaussian Naive Bayes, CART and random forest,
with repeated stratified cross-validation, RFECV, grid search and feature importance.
"""

from fake_review_lab.learner.forest import ForestModel, ForestParams, train_forest
from fake_review_lab.learner.importance import FeatureImportance, feature_importance
from fake_review_lab.learner.metrics import (
    ConfusionMatrix,
    Metrics,
    MetricSummary,
    auc_roc,
    evaluate,
)
from fake_review_lab.learner.model_spec import (
    ALGORITHMS,
    FittedClassifier,
    ModelSpec,
    fit_classifier,
    predict_score,
    train_model,
)
from fake_review_lab.learner.naive_bayes import NBModel, train_gnb
from fake_review_lab.learner.persistence import load_model, save_model
from fake_review_lab.learner.selection import (
    DEFAULT_GRID,
    GridSearchResult,
    RFECVResult,
    grid_search,
    rfecv,
)
from fake_review_lab.learner.tree import TreeModel, TreeParams, train_tree
from fake_review_lab.learner.validation import (
    CVConfig,
    CVResult,
    compare_algorithms,
    cross_validate,
    stratified_folds,
)

__all__ = [
    "ALGORITHMS",
    "CVConfig",
    "CVResult",
    "ConfusionMatrix",
    "DEFAULT_GRID",
    "FeatureImportance",
    "FittedClassifier",
    "ForestModel",
    "ForestParams",
    "GridSearchResult",
    "MetricSummary",
    "Metrics",
    "ModelSpec",
    "NBModel",
    "RFECVResult",
    "TreeModel",
    "TreeParams",
    "auc_roc",
    "compare_algorithms",
    "cross_validate",
    "evaluate",
    "feature_importance",
    "fit_classifier",
    "grid_search",
    "load_model",
    "predict_score",
    "rfecv",
    "save_model",
    "stratified_folds",
    "train_forest",
    "train_gnb",
    "train_model",
    "train_tree",
]
