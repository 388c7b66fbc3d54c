"""
Confusion matrix, threshold metrics and ROC AUC. Fake is the positive class.

A metric whose denominator is zero is ``None`` (undefined), never 0.
"""

from collections.abc import Sequence
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np
from scipy import stats as scipy_stats

from fake_review_lab.errors import InsufficientSamplesError

METRIC_NAMES = ("precision", "recall", "f1", "accuracy", "auc_roc")


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(
            self.tp + other.tp,
            self.fp + other.fp,
            self.fn + other.fn,
            self.tn + other.tn,
        )


@dataclass(frozen=True)
class Metrics:
    precision: Optional[float]
    recall: Optional[float]
    f1: Optional[float]
    accuracy: Optional[float]
    auc_roc: Optional[float] = None

    @property
    def undefined(self) -> tuple[str, ...]:
        """Names of metrics whose denominator was zero."""
        return tuple(name for name in METRIC_NAMES if getattr(self, name) is None)

    def to_dict(self) -> dict[str, Optional[float]]:
        return asdict(self)


def _ratio(numerator: float, denominator: float) -> Optional[float]:
    return numerator / denominator if denominator else None


def confusion_matrix(
    y_true: Sequence[int] | np.ndarray,
    scores: Sequence[float] | np.ndarray,
    threshold: float = 0.5,
) -> ConfusionMatrix:
    truth = np.asarray(y_true).astype(bool)
    predicted = np.asarray(scores, dtype=np.float64) >= threshold
    if truth.shape != predicted.shape or truth.size == 0:
        raise InsufficientSamplesError("y_true and scores must be equal, non-empty.")
    return ConfusionMatrix(
        tp=int(np.sum(truth & predicted)),
        fp=int(np.sum(~truth & predicted)),
        fn=int(np.sum(truth & ~predicted)),
        tn=int(np.sum(~truth & ~predicted)),
    )


def metrics_from_confusion(
    matrix: ConfusionMatrix, auc: Optional[float] = None
) -> Metrics:
    precision = _ratio(matrix.tp, matrix.tp + matrix.fp)
    recall = _ratio(matrix.tp, matrix.tp + matrix.fn)
    f1 = None
    if precision is not None and recall is not None:
        f1 = _ratio(2 * precision * recall, precision + recall)
    accuracy = _ratio(matrix.tp + matrix.tn, matrix.total)
    return Metrics(precision, recall, f1, accuracy, auc)


def evaluate(
    y_true: Sequence[int] | np.ndarray,
    scores: Sequence[float] | np.ndarray,
    threshold: float = 0.5,
) -> tuple[ConfusionMatrix, Metrics]:
    """
    Threshold scores (fake when ``score >= threshold``) and compute the metrics.

    Parameters
    ----------
    y_true: array of int
        1 for fake, 0 for regular.
    scores: array of float
        Fake-class scores.
    threshold: float, default = 0.5

    Returns
    -------
    tuple[ConfusionMatrix, Metrics]
        ``Metrics.auc_roc`` is left ``None``; see ``auc_roc``.
    """
    matrix = confusion_matrix(y_true, scores, threshold)
    return matrix, metrics_from_confusion(matrix)


def auc_roc(
    y_true: Sequence[int] | np.ndarray, scores: Sequence[float] | np.ndarray
) -> float:
    """
    Area under the ROC curve as the rank statistic
    ``P(score_fake > score_regular) + 0.5 * P(score_fake == score_regular)``.

    Raises
    ------
    InsufficientSamplesError
        If only one class is present.
    """
    truth = np.asarray(y_true).astype(bool)
    values = np.asarray(scores, dtype=np.float64)
    n_pos = int(truth.sum())
    n_neg = int(truth.size - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise InsufficientSamplesError("auc_roc needs both classes.")
    ranks = scipy_stats.rankdata(values)
    rank_sum = float(ranks[truth].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


@dataclass(frozen=True)
class MetricSummary:
    """
    Metrics aggregated over folds.

    ``mean`` and ``std`` (population) are taken over the folds where a metric is
    defined; ``undefined`` counts the folds where it is not.
    """

    mean: dict[str, Optional[float]]
    std: dict[str, Optional[float]]
    undefined: dict[str, int]
    n_folds: int
    confusion: ConfusionMatrix

    def to_dict(self) -> dict[str, object]:
        return {
            "mean": self.mean,
            "std": self.std,
            "undefined": self.undefined,
            "n_folds": self.n_folds,
            "confusion": asdict(self.confusion),
        }


def summarize(
    results: Sequence[tuple[ConfusionMatrix, Metrics]],
) -> MetricSummary:
    """Aggregate per-fold results in the given order."""
    mean: dict[str, Optional[float]] = {}
    std: dict[str, Optional[float]] = {}
    undefined: dict[str, int] = {}
    for name in METRIC_NAMES:
        values = [getattr(m, name) for _, m in results]
        defined = np.array([v for v in values if v is not None], dtype=np.float64)
        undefined[name] = len(values) - len(defined)
        mean[name] = float(defined.mean()) if defined.size else None
        std[name] = float(defined.std()) if defined.size else None
    confusion = ConfusionMatrix(0, 0, 0, 0)
    for matrix, _ in results:
        confusion = confusion + matrix
    return MetricSummary(mean, std, undefined, len(results), confusion)
