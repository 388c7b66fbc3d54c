from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from fake_review_lab.errors import DimensionMismatchError, InsufficientSamplesError

VAR_SMOOTHING = 1e-9


@dataclass(frozen=True)
class NBModel:
    """
    Gaussian Naive Bayes over two classes; row 0 is regular, row 1 is fake.
    """

    priors: np.ndarray  # (2,)
    means: np.ndarray  # (2, d)
    variances: np.ndarray  # (2, d)

    @property
    def n_features(self) -> int:
        return int(self.means.shape[1])

    def joint_log_likelihood(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise DimensionMismatchError(
                f"Model expects {self.n_features} features, got {X.shape}."
            )
        columns = []
        for cls in range(2):
            log_density = -0.5 * np.sum(
                np.log(2.0 * np.pi * self.variances[cls])
                + (X - self.means[cls]) ** 2 / self.variances[cls],
                axis=1,
            )
            columns.append(np.log(self.priors[cls]) + log_density)
        return np.column_stack(columns)

    def log_posteriors(self, X: np.ndarray) -> np.ndarray:
        joint = self.joint_log_likelihood(X)
        return joint - logsumexp(joint, axis=1, keepdims=True)

    def predict_score(self, X: np.ndarray) -> np.ndarray:
        return np.exp(self.log_posteriors(X)[:, 1])


def train_gnb(X: np.ndarray, y: np.ndarray) -> NBModel:
    """
    Fit class priors and per-feature Gaussians.

    Variances are floored at ``1e-9`` times the largest feature variance of ``X`` (or
    ``1e-9`` if every feature is constant).

    Raises
    ------
    InsufficientSamplesError
        If only one class is present.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2 or len(X) != len(y):
        raise DimensionMismatchError("X must be n x d with one label per row.")
    if len(np.unique(y)) != 2:
        raise InsufficientSamplesError("Naive Bayes needs both classes.")

    largest = float(np.max(X.var(axis=0))) if X.size else 0.0
    floor = VAR_SMOOTHING * largest if largest > 0.0 else VAR_SMOOTHING
    priors = np.empty(2)
    means = np.empty((2, X.shape[1]))
    variances = np.empty((2, X.shape[1]))
    for cls in range(2):
        rows = X[y == cls]
        priors[cls] = len(rows) / len(X)
        means[cls] = rows.mean(axis=0)
        variances[cls] = np.maximum(rows.var(axis=0), floor)
    return NBModel(priors, means, variances)
