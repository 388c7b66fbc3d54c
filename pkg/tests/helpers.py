"""
Test helpers used across multiple test modules.

Data moves through the package from:

        -> review records (dicts in the corpus file layout)
            -> corpus file (.jsonl) / ReviewCorpus
                -> feature table (.csv)
                    -> models, cross-validation reports and sweeps

The helpers below build small, hand-checkable data for each stage. Functions rather
than constants are used so every test gets its own copy.
"""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

import numpy as np
from sqlalchemy import Engine
from sqlalchemy.orm import Session

from fake_review_lab.corpus import Label, Review, ReviewCorpus
from fake_review_lab.featurizer import FEATURE_COLUMNS, FeatureTable

DAY = 86_400


@dataclass
class DbHandle:
    """
    Group SQL Alchemy database connection objects.

    Attributes
    ----------
    engine: Engine
        Engine bound to a database.
    session: Session
        Session bound to an engine.
    """

    engine: Engine
    session: Session


def review_record(
    review_id: str = "r1",
    app_id: str = "a1",
    reviewer_id: str = "u1",
    rating: int = 5,
    timestamp: int = 1_300_000_000,
    title: str = "Great app",
    body: str = "Works as described",
    label: Optional[str] = "regular",
    helpful_votes: int = 0,
    unhelpful_votes: int = 0,
) -> dict[str, Any]:
    """
    Return one review in the corpus file layout. Every field can be overridden.
    """
    return {
        "review_id": review_id,
        "app_id": app_id,
        "reviewer_id": reviewer_id,
        "title": title,
        "body": body,
        "rating": rating,
        "timestamp": timestamp,
        "helpful_votes": helpful_votes,
        "unhelpful_votes": unhelpful_votes,
        "label": label,
    }


def make_review(**overrides: Any) -> Review:
    record = review_record(**overrides)
    label = record.pop("label")
    return Review(**record, label=Label(label) if label is not None else None)


def small_corpus_records() -> list[dict[str, Any]]:
    """
    Six reviews by three reviewers over two apps.

    - ``u1`` (fake): three 5-star reviews of ``a1`` two days apart.
    - ``u2`` (regular): a 2-star review of ``a1`` and a 4-star review of ``a2`` ten
      days apart.
    - ``u3`` (regular): a single 3-star review of ``a2``.
    """
    t0 = 1_300_000_000
    return [
        review_record("r1", "a1", "u1", 5, t0, "Best app", "Best app ever", "fake"),
        review_record("r2", "a1", "u1", 5, t0 + 2 * DAY, "Love", "Love it", "fake"),
        review_record("r3", "a1", "u1", 5, t0 + 4 * DAY, "Great", "Great app", "fake"),
        review_record("r4", "a1", "u2", 2, t0, "Crashes", "Crashes on start"),
        review_record("r5", "a2", "u2", 4, t0 + 10 * DAY, "Fine", "Does the job"),
        review_record("r6", "a2", "u3", 3, t0, "Okay", "It is okay I guess"),
    ]


def small_corpus() -> ReviewCorpus:
    reviews = []
    for record in small_corpus_records():
        label = record.pop("label")
        reviews.append(Review(**record, label=Label(label)))
    return ReviewCorpus.from_reviews(reviews)


def write_jsonl(records: list[dict[str, Any]], path: Path) -> Path:
    with open(path, "w", encoding="utf-8") as file_handle:
        for record in records:
            file_handle.write(json.dumps(record) + "\n")
    return path


def separable_dataset(
    n_per_class: int = 40, n_features: int = 4, seed: int = 0, gap: float = 4.0
) -> tuple[np.ndarray, np.ndarray]:
    """
    Two Gaussian blobs ``gap`` standard deviations apart on every feature.

    Returns
    -------
    tuple[np.ndarray, np.ndarray]
        ``X`` with positive entries (safe for unit-norm preprocessing) and ``y`` with
        the first ``n_per_class`` rows labelled 1.
    """
    rng = np.random.default_rng(seed)
    fake = rng.normal(10.0 + gap, 1.0, size=(n_per_class, n_features))
    regular = rng.normal(10.0, 1.0, size=(n_per_class, n_features))
    # Opposite directions so the classes also differ after unit-norm scaling.
    fake[:, 0] += 3 * gap
    regular[:, -1] += 3 * gap
    X = np.vstack([fake, regular])
    y = np.concatenate([np.ones(n_per_class), np.zeros(n_per_class)]).astype(np.int64)
    return X, y


def feature_table(
    n_per_class: int = 30, seed: int = 0, gap: float = 4.0
) -> FeatureTable:
    """A labelled table with the real 15 feature columns and separable classes."""
    X, y = separable_dataset(n_per_class, len(FEATURE_COLUMNS), seed, gap)
    labels = tuple(Label.FAKE if value == 1 else Label.REGULAR for value in y)
    return FeatureTable(X, labels)
