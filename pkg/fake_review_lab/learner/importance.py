from dataclasses import dataclass
from typing import Literal

import numpy as np

from fake_review_lab.errors import ParameterError, UnsupportedModelError
from fake_review_lab.learner.forest import ForestModel
from fake_review_lab.learner.model_spec import Model
from fake_review_lab.learner.tree import LEAF, TreeModel

ImportanceMethod = Literal["split_count", "impurity"]


@dataclass(frozen=True)
class FeatureImportance:
    """
    Normalised importances, one per feature.

    ``degenerate`` is set when no tree has a single split; ``values`` are then all 0.
    """

    values: np.ndarray
    method: ImportanceMethod
    degenerate: bool = False


def _tree_contribution(tree: TreeModel, method: ImportanceMethod) -> np.ndarray:
    internal = tree.feature != LEAF
    if method == "split_count":
        weights = np.ones(int(internal.sum()))
    else:
        # Weighted Gini decrease as a share of the samples the tree was grown on.
        weights = tree.decrease[internal] / tree.n_samples[0]
    return np.bincount(
        tree.feature[internal], weights=weights, minlength=tree.n_features
    ).astype(np.float64)


def feature_importance(
    model: Model, method: ImportanceMethod = "split_count"
) -> FeatureImportance:
    """
    Importance of each feature in a tree or forest.

    Parameters
    ----------
    model: TreeModel | ForestModel
    method: {"split_count", "impurity"}, default = "split_count"
        ``split_count`` counts the internal nodes splitting on each feature, summed over
        all trees. ``impurity`` sums the weighted Gini decrease of those nodes instead.

    Returns
    -------
    FeatureImportance
        Values sum to 1 unless the model is leaf-only.

    Raises
    ------
    UnsupportedModelError
        For models without splits, i.e. Naive Bayes.
    """
    if method not in ("split_count", "impurity"):
        raise ParameterError(f"Unknown importance method '{method}'.")
    if isinstance(model, TreeModel):
        trees: tuple[TreeModel, ...] = (model,)
    elif isinstance(model, ForestModel):
        trees = model.trees
    else:
        raise UnsupportedModelError(
            f"{type(model).__name__} does not provide feature importances."
        )

    total = np.zeros(model.n_features, dtype=np.float64)
    for tree in trees:
        total += _tree_contribution(tree, method)
    mass = total.sum()
    if mass <= 0.0:
        return FeatureImportance(np.zeros(model.n_features), method, degenerate=True)
    return FeatureImportance(total / mass, method)
