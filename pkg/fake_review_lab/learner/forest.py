import logging
from dataclasses import dataclass, field, replace

import numpy as np
from joblib import Parallel, delayed

from fake_review_lab.errors import (
    DimensionMismatchError,
    InsufficientSamplesError,
    ParameterError,
)
from fake_review_lab.learner.tree import TreeModel, TreeParams, train_tree
from fake_review_lab.utils import derive_seed

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ForestParams:
    n_estimators: int = 100
    tree: TreeParams = field(default_factory=lambda: TreeParams(max_features="sqrt"))
    bootstrap: bool = True
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_estimators < 1:
            raise ParameterError(
                f"n_estimators must be >= 1, got {self.n_estimators}."
            )


@dataclass(frozen=True)
class ForestModel:
    n_features: int
    trees: tuple[TreeModel, ...]

    def predict_score(self, X: np.ndarray) -> np.ndarray:
        """Mean of the tree scores."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise DimensionMismatchError(
                f"Model expects {self.n_features} features, got {X.shape}."
            )
        total = np.zeros(len(X), dtype=np.float64)
        for tree in self.trees:
            total += tree.predict_score(X)
        return total / len(self.trees)


def _grow(
    X: np.ndarray, y: np.ndarray, params: ForestParams, index: int
) -> TreeModel:
    rng = np.random.default_rng(derive_seed(params.seed, index))
    tree_params = replace(params.tree, seed=int(rng.integers(2**32)))
    if not params.bootstrap:
        return train_tree(X, y, tree_params)
    rows = rng.integers(0, len(X), size=len(X))
    return train_tree(X[rows], y[rows], tree_params)


def train_forest(
    X: np.ndarray,
    y: np.ndarray,
    params: ForestParams = ForestParams(),
    workers: int = 1,
) -> ForestModel:
    """
    Grow a random forest.

    Tree ``i`` draws its bootstrap sample and feature orders from
    ``derive_seed(params.seed, i)``, so the model depends on the seed only and never on
    ``workers``.

    Raises
    ------
    InsufficientSamplesError
        If only one class is present.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y).astype(np.int64)
    if X.ndim != 2 or len(X) != len(y):
        raise DimensionMismatchError("X must be n x d with one label per row.")
    if len(np.unique(y)) != 2:
        raise InsufficientSamplesError("A forest needs both classes.")

    if workers > 1:
        trees = Parallel(n_jobs=workers)(
            delayed(_grow)(X, y, params, index) for index in range(params.n_estimators)
        )
    else:
        trees = [_grow(X, y, params, index) for index in range(params.n_estimators)]
    logger.debug(f"Grown {params.n_estimators} trees on {len(X)} samples.")
    return ForestModel(n_features=X.shape[1], trees=tuple(trees))
