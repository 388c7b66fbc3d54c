import json
from pathlib import Path
from unittest.mock import MagicMock

import pandas as pd
import pytest

from fake_review_lab.corpus import load_reviews
from fake_review_lab.errors import (
    CorpusValidationError,
    InsufficientSamplesError,
    MissingInputError,
)
from fake_review_lab.featurizer import FEATURE_COLUMNS, featurize_corpus, write_features
from fake_review_lab.learner.metrics import ConfusionMatrix, Metrics, summarize
from fake_review_lab.learner.model_spec import ModelSpec
from fake_review_lab.learner.validation import CVConfig, CVResult
from fake_review_lab.pipeline import (
    _sibling,
    list_invalid_records,
    require_inputs,
    run_evaluate_cv,
    run_evaluate_model,
    run_featurize,
    run_importance,
    run_ingest,
    run_match,
    run_stats,
    run_sweep_stage,
    run_syngen,
    run_train,
    run_tune,
)
from fake_review_lab.utils import manifest_path
from tests.helpers import feature_table, small_corpus_records, write_jsonl

SMALL_CV = CVConfig(folds=3, repeats=1, seed=0)

# ----------
#  Fixtures
# ----------


@pytest.fixture()
def corpus_with_invalid_line(tmp_path: Path) -> Path:
    path = write_jsonl(small_corpus_records(), tmp_path / "corpus.jsonl")
    with open(path, "a", encoding="utf-8") as file_handle:
        file_handle.write('{"review_id": "bad", "rating": 9}\n')
    return path


@pytest.fixture()
def features_file(tmp_path: Path) -> Path:
    path = tmp_path / "features.csv"
    write_features(feature_table(n_per_class=15), path)
    return path


def mock_cv_result() -> CVResult:
    summary = summarize(
        [(ConfusionMatrix(2, 0, 0, 2), Metrics(1.0, 1.0, 1.0, 1.0, 1.0))]
    )
    return CVResult(summary, ())


# ---------
#  Helpers
# ---------


def test_require_inputs_names_missing_file(tmp_path):
    present = tmp_path / "present.jsonl"
    present.write_text("")
    require_inputs(present, None)
    with pytest.raises(MissingInputError, match="missing.jsonl"):
        require_inputs(present, tmp_path / "missing.jsonl")


def test_sibling():
    assert _sibling(Path("out/report.json"), ".words.csv") == Path(
        "out/report.words.csv"
    )


# --------
#  Ingest
# --------


def test_run_ingest_keeps_rejected_records(tmp_path, corpus_with_invalid_line):
    db_path = tmp_path / "store.db"

    corpus = run_ingest(corpus_with_invalid_line, db_path)

    assert len(corpus) == 6
    assert corpus.skipped_count == 1
    assert manifest_path(db_path).exists()
    stored = load_reviews(db_path)
    assert stored.reviews == corpus.reviews
    assert stored.skipped_count == 1


def test_run_ingest_replaces_existing_store(tmp_path, corpus_file):
    db_path = tmp_path / "store.db"
    run_ingest(corpus_file, db_path)
    run_ingest(corpus_file, db_path)
    assert len(load_reviews(db_path)) == 6


def test_run_ingest_strict_raises(tmp_path, corpus_with_invalid_line):
    with pytest.raises(CorpusValidationError, match="line 7"):
        run_ingest(corpus_with_invalid_line, tmp_path / "store.db", strict=True)


def test_run_ingest_rolls_back_on_commit_error(tmp_path, corpus_file):
    mock_session = MagicMock()
    mock_session.__enter__.return_value = mock_session
    mock_session.commit.side_effect = RuntimeError("disk full")
    mock_create_db = MagicMock()

    with pytest.raises(RuntimeError, match="disk full"):
        run_ingest(
            corpus_file,
            tmp_path / "store.db",
            get_session_func=MagicMock(return_value=mock_session),
            create_db_func=mock_create_db,
        )

    mock_create_db.assert_called_once_with(tmp_path / "store.db")
    mock_session.rollback.assert_called_once()


def test_run_ingest_missing_input(tmp_path):
    with pytest.raises(MissingInputError):
        run_ingest(tmp_path / "nope.jsonl", tmp_path / "store.db")


# ---------------
#  Match / Stats
# ---------------


def test_run_match(tmp_path, corpus_file):
    candidates = tmp_path / "candidates.jsonl"
    candidates.write_text(
        '{"id": "c1", "title": "Best app", "body": "Best app ever"}\n'
        '{"id": "c2", "title": "Nothing", "body": "alike"}\n'
    )
    out_path = tmp_path / "matches.csv"

    results = run_match(candidates, corpus_file, out_path, cap=3)

    frame = pd.read_csv(out_path, keep_default_na=False)
    assert list(frame["candidate_id"]) == ["c1", "c2"]
    assert [result.method.value for result in results] == ["exact", "none"]
    parameters = json.loads(manifest_path(out_path).read_text())["parameters"]
    assert parameters["max_dist"] == 3


def test_run_stats_writes_rank_tables(tmp_path, corpus_file):
    apps_path = tmp_path / "apps.jsonl"
    apps_path.write_text(
        '{"app_id": "a1", "category": "Games", "price_cents": 0}\n'
        '{"app_id": "a2", "category": "Books", "price_cents": 99}\n'
    )
    out_path = tmp_path / "report.json"

    report = run_stats(corpus_file, out_path, apps_path=apps_path, top_k=10)

    assert json.loads(out_path.read_text())["counts"] == report["counts"]
    words = pd.read_csv(tmp_path / "report.words.csv")
    assert list(words.columns) == ["token", "rank_fake", "rank_regular", "delta"]
    assert (tmp_path / "report.bigrams.csv").exists()
    categories = pd.read_csv(tmp_path / "report.categories.csv")
    assert "delta" in categories.columns
    assert manifest_path(out_path).exists()


def test_run_stats_without_metadata_has_no_category_table(tmp_path, corpus_file):
    run_stats(corpus_file, tmp_path / "report.json")
    assert not (tmp_path / "report.categories.csv").exists()


# ---------------
#  Featurisation
# ---------------


def test_run_featurize_uses_injected_functions(tmp_path, corpus):
    mock_load = MagicMock(return_value=corpus)
    mock_featurize = MagicMock(side_effect=featurize_corpus)
    corpus_path = tmp_path / "corpus.jsonl"
    corpus_path.write_text("")
    out_path = tmp_path / "features.csv"

    table = run_featurize(
        corpus_path,
        out_path,
        store_lifetime_s=1234,
        load_corpus_func=mock_load,
        featurize_func=mock_featurize,
    )

    mock_load.assert_called_once_with(corpus_path, False, None)
    mock_featurize.assert_called_once_with(corpus, 1234)
    assert len(table) == 6
    assert pd.read_csv(out_path).shape == (6, len(FEATURE_COLUMNS) + 1)


# ----------
#  Learning
# ----------


def test_train_evaluate_and_importance(tmp_path, features_file):
    model_path = tmp_path / "model.json"
    run_train(features_file, model_path, ModelSpec.default("dt"), seed=3)
    assert json.loads(manifest_path(model_path).read_text())["seed"] == 3

    report = run_evaluate_model(model_path, features_file, tmp_path / "eval.json")
    assert report["algorithm"] == "dt"
    assert report["metrics"]["accuracy"] == 1.0
    assert report["metrics"]["auc_roc"] == 1.0
    assert sum(report["confusion"].values()) == 30

    frame = run_importance(model_path, tmp_path / "importance.csv")
    assert list(frame.columns) == ["feature", "importance"]
    assert sorted(frame["feature"]) == sorted(FEATURE_COLUMNS)
    assert list(frame["importance"]) == sorted(frame["importance"], reverse=True)
    assert frame["importance"].sum() == pytest.approx(1.0)


def test_run_evaluate_cv_json_and_csv(tmp_path, features_file):
    mock_cv = MagicMock(return_value=mock_cv_result())
    specs = [ModelSpec.default("nb"), ModelSpec.default("dt")]

    summaries = run_evaluate_cv(
        features_file,
        tmp_path / "cv.json",
        specs,
        SMALL_CV,
        cross_validate_func=mock_cv,
    )
    run_evaluate_cv(
        features_file,
        tmp_path / "cv.csv",
        specs,
        SMALL_CV,
        cross_validate_func=mock_cv,
    )

    assert mock_cv.call_count == 4
    assert list(summaries) == ["nb", "dt"]
    assert json.loads((tmp_path / "cv.json").read_text())["nb"]["n_folds"] == 1
    frame = pd.read_csv(tmp_path / "cv.csv")
    assert list(frame.columns) == [
        "algorithm",
        "precision",
        "recall",
        "f1",
        "accuracy",
        "auc_roc",
    ]
    assert list(frame["algorithm"]) == ["nb", "dt"]


def test_run_tune_rfecv_reports_feature_names(tmp_path, features_file):
    result = run_tune(
        features_file,
        tmp_path / "rfecv.json",
        "rfecv",
        SMALL_CV,
        spec=ModelSpec.default("dt"),
        scoring="auc_roc",
    )
    assert result["method"] == "rfecv"
    assert len(result["curve"]) == len(FEATURE_COLUMNS)
    assert set(result["selected"]) <= set(FEATURE_COLUMNS)


def test_run_tune_grid(tmp_path, features_file):
    result = run_tune(
        features_file,
        tmp_path / "grid.json",
        "grid",
        SMALL_CV,
        grid={"n_estimators": [2], "max_depth": [2, None]},
    )
    assert len(result["table"]) == 2
    assert result["best_params"]["n_estimators"] == 2


def test_run_sweep_stage(tmp_path):
    features_path = tmp_path / "features.csv"
    write_features(feature_table(n_per_class=40), features_path)
    out_path = tmp_path / "sweep.csv"

    rows = run_sweep_stage(
        features_path,
        out_path,
        [ModelSpec.default("nb")],
        SMALL_CV,
        seed=1,
        min_skew=50.0,
        n_fake=27,
    )

    assert [row.skew for row in rows] == [90.0, 80.0, 70.0, 60.0, 50.0]
    assert [row.n_regular for row in rows] == [3, 7, 12, 18, 27]
    assert all(row.n_fake == 27 for row in rows)
    assert pd.read_csv(out_path).shape[0] == 5


def test_run_sweep_stage_too_many_fakes(tmp_path, features_file):
    with pytest.raises(InsufficientSamplesError):
        run_sweep_stage(
            features_file,
            tmp_path / "sweep.csv",
            [ModelSpec("nb")],
            SMALL_CV,
            seed=1,
            n_fake=99,
        )


# --------------------
#  Synthetic / Report
# --------------------


def test_run_syngen_writes_corpus_and_sidecars(tmp_path):
    out_path = tmp_path / "synthetic.jsonl"
    apps_path = tmp_path / "apps.jsonl"

    corpus = run_syngen(
        out_path,
        seed=2,
        n_fake_reviewers=2,
        n_regular_reviewers=4,
        n_apps=10,
        apps_out_path=apps_path,
    )

    assert load_reviews(out_path).reviews == corpus.reviews
    sidecar = json.loads((tmp_path / "synthetic.params.json").read_text())
    assert sidecar["counts"]["reviews"] == len(corpus)
    assert len(apps_path.read_text().splitlines()) == 10
    assert json.loads(manifest_path(out_path).read_text())["seed"] == 2


def test_list_invalid_records(tmp_path, corpus_with_invalid_line, capsys):
    db_path = tmp_path / "store.db"
    run_ingest(corpus_with_invalid_line, db_path)

    list_invalid_records(db_path)

    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "1 invalid records found:"
    assert lines[1].startswith(f"[{corpus_with_invalid_line}:7] ")
    assert any(line.startswith("  - rating: ") for line in lines[2:])
