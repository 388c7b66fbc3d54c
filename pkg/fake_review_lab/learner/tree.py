"""
Binary CART decision tree with Gini impurity.

Split rule
----------
At every node the candidate features are scanned for thresholds at the midpoints of
consecutive distinct sorted values; a sample goes left when ``x <= threshold``. The
split maximising

    S = (pos_l^2 + neg_l^2) / n_l + (pos_r^2 + neg_r^2) / n_r

is taken, which is the split with the largest weighted Gini decrease
``S - (pos^2 + neg^2) / n``. Ties go to the lowest feature index, then the lowest
threshold. A node becomes a leaf when it is pure, at ``max_depth`` (root depth 0),
below ``min_samples_split`` samples, or when no split decreases impurity by more than
``MIN_IMPURITY_DECREASE``. Leaves store the fraction of fake samples.
"""

import math
from dataclasses import dataclass
from typing import Literal, Optional, Union

import numpy as np

from fake_review_lab.errors import (
    DimensionMismatchError,
    InsufficientSamplesError,
    ParameterError,
)

LEAF = -1
MIN_IMPURITY_DECREASE = 1e-10

MaxFeatures = Union[Literal["all", "sqrt"], int]


@dataclass(frozen=True)
class TreeParams:
    criterion: Literal["gini"] = "gini"
    max_depth: Optional[int] = None
    max_features: MaxFeatures = "all"
    min_samples_split: int = 2
    seed: int = 0

    def __post_init__(self) -> None:
        if self.criterion != "gini":
            raise ParameterError(f"Unsupported criterion '{self.criterion}'.")
        if self.max_depth is not None and self.max_depth < 1:
            raise ParameterError(f"max_depth must be >= 1, got {self.max_depth}.")
        if self.min_samples_split < 2:
            raise ParameterError(
                f"min_samples_split must be >= 2, got {self.min_samples_split}."
            )
        if isinstance(self.max_features, str):
            if self.max_features not in ("all", "sqrt"):
                raise ParameterError(f"Unknown max_features '{self.max_features}'.")
        elif self.max_features < 1:
            raise ParameterError(f"max_features must be >= 1, got {self.max_features}.")

    def n_candidate_features(self, n_features: int) -> int:
        if self.max_features == "all":
            return n_features
        if self.max_features == "sqrt":
            return max(1, math.isqrt(n_features))
        return min(int(self.max_features), n_features)


@dataclass(frozen=True)
class TreeModel:
    """
    A fitted tree stored as parallel node arrays (preorder, root at 0).

    ``feature`` is ``LEAF`` (-1) for leaves. ``decrease`` holds the weighted Gini
    decrease of each split and 0 at leaves.
    """

    n_features: int
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    n_samples: np.ndarray
    decrease: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Index of the leaf each row ends in."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise DimensionMismatchError(
                f"Model expects {self.n_features} features, got {X.shape}."
            )
        node = np.zeros(len(X), dtype=np.int64)
        active = self.feature[node] != LEAF
        while active.any():
            rows = np.nonzero(active)[0]
            current = node[rows]
            go_left = X[rows, self.feature[current]] <= self.threshold[current]
            node[rows] = np.where(go_left, self.left[current], self.right[current])
            active[rows] = self.feature[node[rows]] != LEAF
        return node

    def predict_score(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]


def best_threshold(column: np.ndarray, y: np.ndarray) -> Optional[tuple[float, float]]:
    """
    Best ``(S, threshold)`` on one feature, or ``None`` if the feature is constant.
    """
    order = np.argsort(column, kind="stable")
    values = column[order]
    valid = values[:-1] < values[1:]
    if not valid.any():
        return None

    n = len(values)
    total_pos = float(y.sum())
    pos_left = np.cumsum(y[order])[:-1].astype(np.float64)
    n_left = np.arange(1, n, dtype=np.float64)
    neg_left = n_left - pos_left
    n_right = n - n_left
    pos_right = total_pos - pos_left
    neg_right = n_right - pos_right
    score = (pos_left * pos_left + neg_left * neg_left) / n_left + (
        pos_right * pos_right + neg_right * neg_right
    ) / n_right
    score = np.where(valid, score, -np.inf)

    best = int(np.argmax(score))
    lower, upper = float(values[best]), float(values[best + 1])
    threshold = (lower + upper) / 2.0
    if threshold >= upper:
        threshold = lower
    return float(score[best]), threshold


def _find_split(
    X: np.ndarray, y: np.ndarray, k: int, rng: np.random.Generator
) -> Optional[tuple[int, float, float]]:
    n_features = X.shape[1]
    order = range(n_features) if k >= n_features else rng.permutation(n_features)

    n = float(len(y))
    pos = float(y.sum())
    neg = n - pos
    parent_score = (pos * pos + neg * neg) / n

    best: Optional[tuple[float, int, float]] = None
    evaluated = 0
    for feature in order:
        if evaluated >= k:
            break
        found = best_threshold(X[:, feature], y)
        if found is None:
            continue
        evaluated += 1
        score, threshold = found
        if (
            best is None
            or score > best[0]
            or (score == best[0] and int(feature) < best[1])
        ):
            best = (score, int(feature), threshold)

    if best is None or best[0] - parent_score <= MIN_IMPURITY_DECREASE:
        return None
    return best[1], best[2], best[0] - parent_score


def train_tree(
    X: np.ndarray, y: np.ndarray, params: TreeParams = TreeParams()
) -> TreeModel:
    """
    Grow a CART tree.

    Parameters
    ----------
    X: np.ndarray
        ``n x d`` features.
    y: np.ndarray
        1 for fake, 0 for regular.
    params: TreeParams
        ``max_features`` other than ``"all"`` draws a random feature order per node
        from ``params.seed`` and evaluates features until that many non-constant ones
        have been seen.

    Returns
    -------
    TreeModel
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y).astype(np.int64)
    if X.ndim != 2 or len(X) != len(y):
        raise DimensionMismatchError("X must be n x d with one label per row.")
    if len(X) == 0:
        raise InsufficientSamplesError("Cannot grow a tree on zero samples.")

    k = params.n_candidate_features(X.shape[1])
    rng = np.random.default_rng(params.seed)

    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    value: list[float] = []
    n_samples: list[int] = []
    decrease: list[float] = []

    stack: list[tuple[np.ndarray, int, int, bool]] = [
        (np.arange(len(X)), 0, LEAF, True)
    ]
    while stack:
        rows, depth, parent, is_left = stack.pop()
        node = len(feature)
        if parent != LEAF:
            (left if is_left else right)[parent] = node

        labels = y[rows]
        n_node = len(rows)
        n_pos = int(labels.sum())
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        value.append(n_pos / n_node)
        n_samples.append(n_node)
        decrease.append(0.0)

        if not 0 < n_pos < n_node:
            continue
        if n_node < params.min_samples_split:
            continue
        if params.max_depth is not None and depth >= params.max_depth:
            continue
        split = _find_split(X[rows], labels, k, rng)
        if split is None:
            continue

        split_feature, split_threshold, gain = split
        feature[node] = split_feature
        threshold[node] = split_threshold
        decrease[node] = gain
        go_left = X[rows, split_feature] <= split_threshold
        stack.append((rows[~go_left], depth + 1, node, False))
        stack.append((rows[go_left], depth + 1, node, True))

    return TreeModel(
        n_features=X.shape[1],
        feature=np.array(feature, dtype=np.int64),
        threshold=np.array(threshold, dtype=np.float64),
        left=np.array(left, dtype=np.int64),
        right=np.array(right, dtype=np.int64),
        value=np.array(value, dtype=np.float64),
        n_samples=np.array(n_samples, dtype=np.int64),
        decrease=np.array(decrease, dtype=np.float64),
    )
