"""
Full-size runs of the comparison and skew sweep on synthetic corpora with the default
population statistics.

These take minutes rather than seconds. Deselect with ``pytest -m "not slow"``.
"""

import logging
from pathlib import Path

import pandas as pd
import pytest

from fake_review_lab.cli import main
from fake_review_lab.config import UserConfig

logger = logging.getLogger(__name__)

pytestmark = [pytest.mark.e2e, pytest.mark.slow]

SEED = "23"

# ---------
#  Helpers
# ---------


def run_frl(user_config: UserConfig, *argv: str) -> None:
    logger.info(f"frl {' '.join(argv)}")
    main(user_config, list(argv))


def featurize_synthetic(
    user_config: UserConfig, out_dir: Path, fake_reviewers: int, regular_reviewers: int
) -> Path:
    corpus = out_dir / "corpus.jsonl"
    features = out_dir / "features.csv"
    run_frl(
        user_config,
        "syngen",
        "--out",
        str(corpus),
        "--fake-reviewers",
        str(fake_reviewers),
        "--regular-reviewers",
        str(regular_reviewers),
        "--seed",
        SEED,
    )
    run_frl(user_config, "featurize", "--in", str(corpus), "--out", str(features))
    return features


# -------
#  Tests
# -------


def test_balanced_corpus_comparison_and_importance(tmp_path, mock_user_config):
    # About 8,000 reviews per class at the default reviews-per-reviewer means.
    features = featurize_synthetic(mock_user_config, tmp_path, 268, 3200)
    labels = pd.read_csv(features)["label"].value_counts()
    assert 14_000 <= labels.sum() <= 18_000
    assert abs(labels["fake"] - labels["regular"]) / labels.sum() < 0.15

    compare = tmp_path / "compare.csv"
    run_frl(
        mock_user_config,
        "evaluate",
        "--features",
        str(features),
        "--out",
        str(compare),
        "--algorithms",
        "dt,rf",
        "--folds",
        "10",
        "--repeats",
        "3",
        "--seed",
        SEED,
    )
    results = pd.read_csv(compare).set_index("algorithm")
    assert results.loc["rf", "auc_roc"] >= 0.90
    assert results.loc["rf", "auc_roc"] >= results.loc["dt", "auc_roc"]

    model = tmp_path / "rf.json"
    run_frl(
        mock_user_config,
        "train",
        "--features",
        str(features),
        "--out",
        str(model),
        "--algorithm",
        "rf",
        "--seed",
        SEED,
    )
    importance = tmp_path / "importance.csv"
    run_frl(
        mock_user_config,
        "importance",
        "--model",
        str(model),
        "--out",
        str(importance),
        "--method",
        "split_count",
    )
    top_three = set(pd.read_csv(importance)["feature"][:3])
    assert top_three & {"reviewer_total", "app_total"}


def test_sweep_down_to_one_percent(tmp_path, mock_user_config):
    # The 1% cell needs 99 regular reviews per fake one: 79,200 for 800 fakes.
    features = featurize_synthetic(mock_user_config, tmp_path, 40, 34_000)

    out_path = tmp_path / "sweep.csv"
    run_frl(
        mock_user_config,
        "sweep",
        "--features",
        str(features),
        "--out",
        str(out_path),
        "--algorithms",
        "rf",
        "--n-fake",
        "800",
        "--min-skew",
        "1",
        "--folds",
        "5",
        "--repeats",
        "1",
        "--n-estimators",
        "50",
        "--seed",
        SEED,
    )

    rf = pd.read_csv(out_path).set_index("skew")
    assert rf.index.min() == 1.0
    assert set(rf["n_fake"]) == {800}
    assert rf.loc[50.0, "recall"] > rf.loc[1.0, "recall"]
    assert (rf["auc"] > 0.9).all()
