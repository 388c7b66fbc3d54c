import argparse
import json
import os
from unittest.mock import MagicMock, patch

import pytest

from fake_review_lab import __version__
from fake_review_lab.cli import (
    EXIT_DOMAIN_ERROR,
    EXIT_MISSING_INPUT,
    build_model_spec,
    main,
    parse_args,
    resolve_seed,
)
from fake_review_lab.learner.forest import ForestParams
from fake_review_lab.learner.tree import TreeParams
from tests.helpers import review_record, small_corpus_records, write_jsonl

# ----------
#  Fixtures
# ----------


@pytest.fixture(autouse=True)
def restore_joblib_temp_folder(monkeypatch: pytest.MonkeyPatch) -> None:
    """``main`` exports the scratch directory; undo it after each test."""
    monkeypatch.delenv("JOBLIB_TEMP_FOLDER", raising=False)


# ---------
#  Parsing
# ---------


@pytest.mark.parametrize(
    "argv, expected_command",
    [
        (["ingest", "--in", "c.jsonl", "--db", "c.db"], "ingest"),
        (["match", "--candidates", "a", "--corpus", "b", "--out", "m.csv"], "match"),
        (["stats", "--in", "c.jsonl", "--out", "r.json"], "stats"),
        (["featurize", "--in", "c.jsonl", "--out", "f.csv"], "featurize"),
        (["train", "--features", "f.csv", "--out", "m.json"], "train"),
        (
            ["evaluate", "--features", "f.csv", "--out", "e.json", "--model", "m"],
            "evaluate",
        ),
        (
            ["tune", "--features", "f.csv", "--out", "t.json", "--method", "grid"],
            "tune",
        ),
        (["importance", "--model", "m.json", "--out", "i.csv"], "importance"),
        (["sweep", "--features", "f.csv", "--out", "s.csv"], "sweep"),
        (["syngen", "--out", "s.jsonl"], "syngen"),
        (["list-invalids", "--db", "c.db"], "list-invalids"),
    ],
)
def test_parse_args_main_command(argv, expected_command, mock_user_config):
    actual = parse_args(argv, mock_user_config)
    assert isinstance(actual, argparse.Namespace)
    assert actual.command == expected_command


def test_parse_args_defaults(mock_user_config):
    args = parse_args(
        ["sweep", "--features", "f.csv", "--out", "s.csv"], mock_user_config
    )
    assert args.algorithms == ["nb", "dt", "rf"]
    assert args.min_skew == 0.1
    assert args.folds == 10
    assert args.repeats == 30
    assert args.preprocess_scope == "fold"
    assert args.threshold == 0.5
    assert args.seed is None
    assert args.workers == mock_user_config.workers


def test_featurize_default_store_lifetime_comes_from_config(mock_user_config):
    args = parse_args(["featurize", "--in", "c", "--out", "f"], mock_user_config)
    assert args.store_lifetime_s == mock_user_config.store_lifetime_s


def test_parse_algorithms_list(mock_user_config):
    args = parse_args(
        ["evaluate", "--features", "f", "--out", "o", "--algorithms", "nb, rf"],
        mock_user_config,
    )
    assert args.algorithms == ["nb", "rf"]
    assert args.model is None


EVALUATE = ["evaluate", "--features", "f", "--out", "o"]


@pytest.mark.parametrize(
    "argv",
    [
        [],
        EVALUATE,
        EVALUATE + ["--model", "m", "--algorithms", "dt"],
        EVALUATE + ["--algorithms", "svm"],
        ["sweep", "--features", "f", "--out", "o", "--min-skew", "0"],
        ["train", "--features", "f", "--out", "o", "--max-features", "log2"],
        ["tune", "--features", "f", "--out", "o", "--method", "grid", "--scoring", "x"],
    ],
    ids=[
        "no_command",
        "evaluate_without_mode",
        "evaluate_with_both_modes",
        "unknown_algorithm",
        "skew_out_of_range",
        "bad_max_features",
        "unknown_scoring",
    ],
)
def test_invalid_arguments_exit(argv, mock_user_config):
    with pytest.raises(SystemExit) as exc_info:
        parse_args(argv, mock_user_config)
    assert exc_info.value.code == 2


@pytest.mark.parametrize(
    "extra",
    [
        ["--folds", "5"],
        ["--repeats", "2"],
        ["--preprocess-scope", "global"],
        ["--n-estimators", "7"],
        ["--max-depth", "3"],
    ],
    ids=["folds", "repeats", "preprocess_scope", "n_estimators", "max_depth"],
)
def test_evaluate_saved_model_rejects_training_flags(extra, capsys, mock_user_config):
    with pytest.raises(SystemExit) as exc_info:
        parse_args(EVALUATE + ["--model", "m"] + extra, mock_user_config)
    assert exc_info.value.code == 2
    assert extra[0] in capsys.readouterr().err


def test_evaluate_saved_model_accepts_threshold(mock_user_config):
    args = parse_args(
        EVALUATE + ["--model", "m", "--threshold", "0.7"], mock_user_config
    )
    assert args.threshold == 0.7
    assert (args.folds, args.repeats, args.preprocess_scope) == (10, 30, "fold")


def test_version_flag_exits_and_prints_version(capsys, mock_user_config):
    with pytest.raises(SystemExit):
        parse_args(["--version"], mock_user_config)
    assert capsys.readouterr().out.strip() == f"frl {__version__}"


# ---------
#  Helpers
# ---------


def test_build_model_spec_applies_overrides(mock_user_config):
    args = parse_args(
        [
            "train",
            "--features",
            "f",
            "--out",
            "o",
            "--n-estimators",
            "7",
            "--max-depth",
            "4",
            "--max-features",
            "3",
        ],
        mock_user_config,
    )
    forest = build_model_spec("rf", args).params
    assert isinstance(forest, ForestParams)
    assert forest.n_estimators == 7
    assert forest.tree.max_depth == 4
    assert forest.tree.max_features == 3

    tree = build_model_spec("dt", args).params
    assert isinstance(tree, TreeParams)
    assert tree.max_depth == 4
    assert build_model_spec("nb", args).params is None


@patch("fake_review_lab.cli.new_root_seed", return_value=1234)
def test_resolve_seed(mock_new_root_seed: MagicMock):
    assert resolve_seed(argparse.Namespace(seed=5)) == 5
    mock_new_root_seed.assert_not_called()
    assert resolve_seed(argparse.Namespace(seed=None)) == 1234


# ------
#  Main
# ------


@patch("fake_review_lab.cli.setup_logging")
@patch("fake_review_lab.cli.run_featurize")
def test_main_dispatches_featurize(
    mock_run_featurize: MagicMock, mock_setup_logging: MagicMock, mock_user_config
):
    main(
        mock_user_config,
        ["featurize", "--in", "c.jsonl", "--out", "f.csv", "--store-lifetime-s", "9"],
    )
    mock_setup_logging.assert_called_once_with(mock_user_config)
    mock_run_featurize.assert_called_once_with("c.jsonl", "f.csv", 9)
    assert os.environ["JOBLIB_TEMP_FOLDER"] == str(mock_user_config.tmp_dir)
    assert mock_user_config.tmp_dir.is_dir()


@patch("fake_review_lab.cli.setup_logging")
@patch("fake_review_lab.cli.run_sweep_stage")
def test_main_sweep_runs_folds_serially(
    mock_run_sweep_stage: MagicMock, mock_setup_logging: MagicMock, mock_user_config
):
    main(
        mock_user_config,
        [
            "sweep",
            "--features",
            "f.csv",
            "--out",
            "s.csv",
            "--seed",
            "3",
            "--workers",
            "4",
            "--algorithms",
            "nb,rf",
            "--n-estimators",
            "12",
            "--min-skew",
            "1",
        ],
    )
    features, out, specs, cv, seed = mock_run_sweep_stage.call_args.args
    assert (features, out, seed) == ("f.csv", "s.csv", 3)
    assert [spec.algorithm for spec in specs] == ["nb", "rf"]
    assert specs[1].params.n_estimators == 12
    assert cv.workers == 1
    assert cv.seed == 3
    assert mock_run_sweep_stage.call_args.kwargs == {
        "min_skew": 1.0,
        "n_fake": None,
        "workers": 4,
    }


@patch("fake_review_lab.cli.setup_logging")
@patch("fake_review_lab.cli.run_evaluate_cv")
def test_main_evaluate_cv(
    mock_run_evaluate_cv: MagicMock, mock_setup_logging: MagicMock, mock_user_config
):
    main(
        mock_user_config,
        [
            "evaluate",
            "--features",
            "f.csv",
            "--out",
            "e.csv",
            "--algorithms",
            "dt,rf",
            "--folds",
            "5",
            "--repeats",
            "2",
            "--seed",
            "8",
        ],
    )
    features, out, specs, cv = mock_run_evaluate_cv.call_args.args
    assert [spec.algorithm for spec in specs] == ["dt", "rf"]
    assert (cv.folds, cv.repeats, cv.seed) == (5, 2, 8)


@patch("fake_review_lab.cli.setup_logging")
def test_main_missing_input_exits_2(
    mock_setup_logging, tmp_path, capsys, mock_user_config
):
    missing = tmp_path / "missing.jsonl"
    with pytest.raises(SystemExit) as exc_info:
        main(mock_user_config, ["featurize", "--in", str(missing), "--out", "f.csv"])
    assert exc_info.value.code == EXIT_MISSING_INPUT
    assert "missing.jsonl" in capsys.readouterr().err


@patch("fake_review_lab.cli.setup_logging")
def test_main_domain_error_exits_1_with_json(
    mock_setup_logging, tmp_path, capsys, mock_user_config
):
    corpus = write_jsonl([review_record(rating=9)], tmp_path / "corpus.jsonl")
    with pytest.raises(SystemExit) as exc_info:
        main(
            mock_user_config,
            ["ingest", "--in", str(corpus), "--db", str(tmp_path / "c.db"), "--strict"],
        )
    assert exc_info.value.code == EXIT_DOMAIN_ERROR
    error = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert error["error"] == "CorpusValidationError"
    assert "line 1" in error["message"]


@patch("fake_review_lab.cli.setup_logging")
def test_main_unwritable_output_exits_1_with_json(
    mock_setup_logging, tmp_path, capsys, mock_user_config
):
    corpus = write_jsonl(small_corpus_records(), tmp_path / "corpus.jsonl")
    out = tmp_path / "no_such_dir" / "f.csv"
    with pytest.raises(SystemExit) as exc_info:
        main(mock_user_config, ["featurize", "--in", str(corpus), "--out", str(out)])
    assert exc_info.value.code == EXIT_DOMAIN_ERROR
    error = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert error["error"] == "OSError"
    assert "no_such_dir" in error["message"]


@patch("fake_review_lab.cli.setup_logging")
def test_main_negative_match_distance_exits_1_with_json(
    mock_setup_logging, tmp_path, capsys, mock_user_config
):
    corpus = write_jsonl(small_corpus_records(), tmp_path / "corpus.jsonl")
    candidates = write_jsonl(
        [{"id": "c1", "title": "Great", "body": "Great app"}],
        tmp_path / "candidates.jsonl",
    )
    argv = ["match", "--candidates", str(candidates), "--corpus", str(corpus)]
    with pytest.raises(SystemExit) as exc_info:
        main(
            mock_user_config,
            argv + ["--out", str(tmp_path / "m.csv"), "--max-dist", "-1"],
        )
    assert exc_info.value.code == EXIT_DOMAIN_ERROR
    error = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert error["error"] == "ParameterError"
    assert not (tmp_path / "m.csv").exists()
