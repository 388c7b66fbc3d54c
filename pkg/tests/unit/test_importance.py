import numpy as np
import pytest

from fake_review_lab.errors import ParameterError, UnsupportedModelError
from fake_review_lab.learner.forest import ForestParams, train_forest
from fake_review_lab.learner.importance import feature_importance
from fake_review_lab.learner.naive_bayes import train_gnb
from fake_review_lab.learner.tree import train_tree
from tests.helpers import separable_dataset


def informative_dataset(seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Column 1 decides the label; columns 0 and 2 are noise."""
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(100, 3))
    y = (X[:, 1] > 0).astype(np.int64)
    return X, y


@pytest.mark.parametrize("method", ["split_count", "impurity"])
def test_importances_sum_to_one(method):
    X, y = separable_dataset(gap=0.5)
    forest = train_forest(X, y, ForestParams(n_estimators=10))
    importance = feature_importance(forest, method)
    assert importance.values.sum() == pytest.approx(1.0)
    assert np.all(importance.values >= 0.0)
    assert not importance.degenerate


def test_split_count_of_single_split_tree():
    X = np.array([[0.0, 5.0], [1.0, 5.0], [2.0, 5.0], [3.0, 5.0]])
    y = np.array([0, 0, 1, 1])
    importance = feature_importance(train_tree(X, y), "split_count")
    np.testing.assert_array_equal(importance.values, [1.0, 0.0])


def test_impurity_ranks_informative_feature_first():
    X, y = informative_dataset()
    forest = train_forest(X, y, ForestParams(n_estimators=20, seed=4))
    importance = feature_importance(forest, "impurity")
    assert int(np.argmax(importance.values)) == 1


def test_leaf_only_tree_is_degenerate():
    tree = train_tree(np.array([[1.0], [2.0]]), np.array([1, 1]))
    importance = feature_importance(tree)
    assert importance.degenerate
    np.testing.assert_array_equal(importance.values, [0.0])


def test_naive_bayes_is_unsupported():
    X, y = separable_dataset()
    with pytest.raises(UnsupportedModelError):
        feature_importance(train_gnb(X, y))


def test_unknown_method_raises():
    X, y = separable_dataset()
    with pytest.raises(ParameterError):
        feature_importance(train_tree(X, y), "gain")  # type: ignore[arg-type]
