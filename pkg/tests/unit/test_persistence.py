import json

import numpy as np
import pytest

from fake_review_lab.errors import ModelFormatError
from fake_review_lab.learner.forest import ForestParams
from fake_review_lab.learner.model_spec import ModelSpec, fit_classifier
from fake_review_lab.learner.persistence import (
    MODEL_FORMAT,
    MODEL_VERSION,
    load_model,
    save_model,
)
from fake_review_lab.learner.tree import TreeParams
from tests.helpers import separable_dataset


@pytest.mark.parametrize(
    "spec",
    [
        ModelSpec("nb"),
        ModelSpec("dt", TreeParams(max_depth=3, seed=2)),
        ModelSpec("rf", ForestParams(n_estimators=4, seed=5)),
    ],
    ids=["nb", "dt", "rf"],
)
def test_saved_model_scores_identically(tmp_path, spec):
    X, y = separable_dataset(gap=0.5)
    classifier = fit_classifier(spec, X, y, features=(0, 2, 3))
    path = tmp_path / "model.json"

    save_model(classifier, path)
    loaded = load_model(path)

    assert loaded.spec == classifier.spec
    assert loaded.features == (0, 2, 3)
    assert loaded.scaler == classifier.scaler
    np.testing.assert_array_equal(loaded.predict_score(X), classifier.predict_score(X))


def test_model_file_header(tmp_path):
    X, y = separable_dataset()
    path = tmp_path / "model.json"
    save_model(fit_classifier(ModelSpec("nb"), X, y), path)
    document = json.loads(path.read_text())
    assert document["format"] == MODEL_FORMAT
    assert document["version"] == MODEL_VERSION
    assert document["algorithm"] == "nb"
    assert document["params"] is None


@pytest.mark.parametrize(
    "document, match",
    [
        ({"format": "something-else", "version": 1}, "is not a"),
        ({"format": MODEL_FORMAT, "version": 99}, "version 99"),
        ({"format": MODEL_FORMAT, "version": MODEL_VERSION}, "malformed"),
        ([1, 2, 3], "is not a"),
    ],
    ids=["wrong_format", "wrong_version", "missing_fields", "not_an_object"],
)
def test_invalid_model_file_raises(tmp_path, document, match):
    path = tmp_path / "model.json"
    path.write_text(json.dumps(document))
    with pytest.raises(ModelFormatError, match=match):
        load_model(path)
