"""
JSON model files.

Layout::

    {
      "format": "fake-review-lab/model",
      "version": 1,
      "algorithm": "nb" | "dt" | "rf",
      "params": {...} | null,
      "features": [column indices],
      "scaler": {"mean": [...], "sd": [...], "fitted_on": "<sha256>"},
      "model": {...}
    }

Floats are written with ``repr`` precision so a loaded model scores bit-identically.
"""

import logging
from pathlib import Path
from typing import Any

import numpy as np

from fake_review_lab.errors import ModelFormatError
from fake_review_lab.featurizer import ScalerState
from fake_review_lab.learner.forest import ForestModel, ForestParams
from fake_review_lab.learner.model_spec import FittedClassifier, Model, ModelSpec
from fake_review_lab.learner.naive_bayes import NBModel
from fake_review_lab.learner.tree import TreeModel, TreeParams
from fake_review_lab.utils import FileHandler

logger = logging.getLogger(__name__)

MODEL_FORMAT = "fake-review-lab/model"
MODEL_VERSION = 1

_TREE_ARRAYS = {
    "feature": np.int64,
    "threshold": np.float64,
    "left": np.int64,
    "right": np.int64,
    "value": np.float64,
    "n_samples": np.int64,
    "decrease": np.float64,
}


def _tree_params_to_dict(params: TreeParams) -> dict[str, Any]:
    return {
        "criterion": params.criterion,
        "max_depth": params.max_depth,
        "max_features": params.max_features,
        "min_samples_split": params.min_samples_split,
        "seed": params.seed,
    }


def _params_to_dict(spec: ModelSpec) -> dict[str, Any] | None:
    if isinstance(spec.params, TreeParams):
        return _tree_params_to_dict(spec.params)
    if isinstance(spec.params, ForestParams):
        return {
            "n_estimators": spec.params.n_estimators,
            "bootstrap": spec.params.bootstrap,
            "seed": spec.params.seed,
            "tree": _tree_params_to_dict(spec.params.tree),
        }
    return None


def _tree_to_dict(tree: TreeModel) -> dict[str, Any]:
    payload: dict[str, Any] = {"n_features": tree.n_features}
    for name in _TREE_ARRAYS:
        payload[name] = getattr(tree, name).tolist()
    return payload


def _tree_from_dict(data: dict[str, Any]) -> TreeModel:
    arrays = {
        name: np.asarray(data[name], dtype=dtype)
        for name, dtype in _TREE_ARRAYS.items()
    }
    return TreeModel(n_features=int(data["n_features"]), **arrays)


def _model_to_dict(model: Model) -> dict[str, Any]:
    if isinstance(model, TreeModel):
        return _tree_to_dict(model)
    if isinstance(model, ForestModel):
        return {
            "n_features": model.n_features,
            "trees": [_tree_to_dict(tree) for tree in model.trees],
        }
    return {
        "priors": model.priors.tolist(),
        "means": model.means.tolist(),
        "variances": model.variances.tolist(),
    }


def save_model(classifier: FittedClassifier, path: Path | str) -> None:
    """Write a fitted classifier and its preprocessing state as JSON."""
    document = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "algorithm": classifier.spec.algorithm,
        "params": _params_to_dict(classifier.spec),
        "features": list(classifier.features),
        "scaler": classifier.scaler.to_dict(),
        "model": _model_to_dict(classifier.model),
    }
    FileHandler.write_json(document, path)


def _spec_from_dict(algorithm: str, params: dict[str, Any] | None) -> ModelSpec:
    if algorithm == "nb":
        return ModelSpec("nb")
    assert params is not None
    if algorithm == "dt":
        return ModelSpec("dt", TreeParams(**params))
    tree = TreeParams(**params["tree"])
    return ModelSpec(
        "rf",
        ForestParams(
            n_estimators=params["n_estimators"],
            tree=tree,
            bootstrap=params["bootstrap"],
            seed=params["seed"],
        ),
    )


def load_model(path: Path | str) -> FittedClassifier:
    """
    Read a model file written by ``save_model``.

    Raises
    ------
    ModelFormatError
        If the file is not a model file of a supported version.
    """
    document = FileHandler.read_json(path)
    if not isinstance(document, dict) or document.get("format") != MODEL_FORMAT:
        raise ModelFormatError(f"'{path}' is not a {MODEL_FORMAT} file.")
    if document.get("version") != MODEL_VERSION:
        raise ModelFormatError(
            f"'{path}' has model version {document.get('version')}, "
            f"only {MODEL_VERSION} is supported."
        )

    try:
        algorithm = document["algorithm"]
        spec = _spec_from_dict(algorithm, document["params"])
        payload = document["model"]
        model: Model
        if algorithm == "dt":
            model = _tree_from_dict(payload)
        elif algorithm == "rf":
            model = ForestModel(
                n_features=int(payload["n_features"]),
                trees=tuple(_tree_from_dict(tree) for tree in payload["trees"]),
            )
        else:
            model = NBModel(
                priors=np.asarray(payload["priors"], dtype=np.float64),
                means=np.asarray(payload["means"], dtype=np.float64),
                variances=np.asarray(payload["variances"], dtype=np.float64),
            )
        scaler = ScalerState.from_dict(document["scaler"])
        features = tuple(int(index) for index in document["features"])
    except (KeyError, TypeError, ValueError, AssertionError) as err:
        raise ModelFormatError(f"'{path}' is malformed: {err!r}") from err

    logger.info(f"Loaded {algorithm} model from '{path}'.")
    return FittedClassifier(spec, model, scaler, features)
