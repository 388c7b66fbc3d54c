"""
Review corpora and the per-reviewer / per-app profiles derived from them.

A corpus is read from a newline-delimited JSON file (one review per line) or from a
SQLite store written by ``frl ingest``. Every record passes through
``schemas.ReviewSchema`` before it becomes a ``Review``. The resulting ``ReviewCorpus``
is immutable and iterates in ``review_id`` order so everything computed from it is
deterministic.
"""

import logging
from collections import defaultdict
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from types import MappingProxyType
from typing import Optional

from fake_review_lab.errors import (
    CorpusValidationError,
    DuplicateReviewError,
    MissingInputError,
)
from fake_review_lab.schemas import (
    AppMetaSchema,
    ReviewSchema,
    validate_jsonl,
)

logger = logging.getLogger(__name__)

SECONDS_PER_DAY = 86_400
STAR_LEVELS = 5


class Label(str, Enum):
    FAKE = "fake"
    REGULAR = "regular"


@dataclass(frozen=True, slots=True)
class Review:
    """
    One store review.

    Attributes
    ----------
    review_id: str
        Unique within a corpus.
    app_id: str
    reviewer_id: str
    title: str
    body: str
    rating: int
        Stars, 1 to 5.
    timestamp: int
        Seconds since the Unix epoch (UTC).
    helpful_votes: int
    unhelpful_votes: int
    label: Label | None
        ``None`` for unlabelled store reviews.
    """

    review_id: str
    app_id: str
    reviewer_id: str
    title: str
    body: str
    rating: int
    timestamp: int
    helpful_votes: int = 0
    unhelpful_votes: int = 0
    label: Optional[Label] = None

    @classmethod
    def from_schema(cls, record: ReviewSchema) -> "Review":
        return cls(
            review_id=record.review_id,
            app_id=record.app_id,
            reviewer_id=record.reviewer_id,
            title=record.title,
            body=record.body,
            rating=record.rating,
            timestamp=record.timestamp,
            helpful_votes=record.helpful_votes,
            unhelpful_votes=record.unhelpful_votes,
            label=Label(record.label) if record.label is not None else None,
        )

    def to_record(self) -> dict[str, object]:
        """Dump to the field layout of the corpus file format."""
        return {
            "review_id": self.review_id,
            "app_id": self.app_id,
            "reviewer_id": self.reviewer_id,
            "title": self.title,
            "body": self.body,
            "rating": self.rating,
            "timestamp": self.timestamp,
            "helpful_votes": self.helpful_votes,
            "unhelpful_votes": self.unhelpful_votes,
            "label": self.label.value if self.label is not None else None,
        }


@dataclass(frozen=True, slots=True)
class AppMeta:
    app_id: str
    category: Optional[str] = None
    price_cents: Optional[int] = None


@dataclass(frozen=True, slots=True)
class ReviewerProfile:
    """
    Aggregate of all reviews written by one reviewer.

    ``review_frequency_s`` is the mean gap between consecutive reviews, i.e.
    ``account_lifetime_s / (total_reviews - 1)``, and is ``None`` for a reviewer with a
    single review.
    """

    reviewer_id: str
    total_reviews: int
    per_star_fraction: tuple[float, float, float, float, float]
    first_ts: int
    last_ts: int
    account_lifetime_s: int
    review_frequency_s: Optional[float]


@dataclass(frozen=True, slots=True)
class AppProfile:
    app_id: str
    total_reviews: int
    per_star_fraction: tuple[float, float, float, float, float]
    category: Optional[str] = None
    price_cents: Optional[int] = None


@dataclass(frozen=True)
class ReviewCorpus:
    """
    An immutable, validated collection of reviews.

    Build with ``ReviewCorpus.from_reviews``; the indexes are derived there.

    Attributes
    ----------
    reviews: tuple[Review, ...]
        Sorted by ``review_id``.
    reviewer_index: Mapping[str, tuple[str, ...]]
        reviewer_id -> review ids (sorted).
    app_index: Mapping[str, tuple[str, ...]]
        app_id -> review ids (sorted).
    apps: Mapping[str, AppMeta]
        Optional app metadata keyed by app_id.
    skipped_count: int
        Records dropped while loading in non-strict mode.
    """

    reviews: tuple[Review, ...]
    reviewer_index: Mapping[str, tuple[str, ...]]
    app_index: Mapping[str, tuple[str, ...]]
    apps: Mapping[str, AppMeta] = field(default_factory=lambda: MappingProxyType({}))
    skipped_count: int = 0

    @classmethod
    def from_reviews(
        cls,
        reviews: Iterable[Review],
        apps: Optional[Mapping[str, AppMeta]] = None,
        skipped_count: int = 0,
    ) -> "ReviewCorpus":
        """
        Sort, check ids and index a collection of reviews.

        Raises
        ------
        DuplicateReviewError
            If two reviews share a ``review_id``.
        """
        ordered = sorted(reviews, key=lambda review: review.review_id)
        for previous, current in zip(ordered, ordered[1:]):
            if previous.review_id == current.review_id:
                raise DuplicateReviewError(
                    f"Duplicate review_id '{current.review_id}' in corpus."
                )

        reviewer_index: dict[str, list[str]] = defaultdict(list)
        app_index: dict[str, list[str]] = defaultdict(list)
        for review in ordered:
            reviewer_index[review.reviewer_id].append(review.review_id)
            app_index[review.app_id].append(review.review_id)

        return cls(
            reviews=tuple(ordered),
            reviewer_index=MappingProxyType(
                {key: tuple(ids) for key, ids in sorted(reviewer_index.items())}
            ),
            app_index=MappingProxyType(
                {key: tuple(ids) for key, ids in sorted(app_index.items())}
            ),
            apps=MappingProxyType(dict(apps or {})),
            skipped_count=skipped_count,
        )

    def __len__(self) -> int:
        return len(self.reviews)

    def __iter__(self) -> Iterator[Review]:
        return iter(self.reviews)

    def subset(self, label: Label) -> "ReviewCorpus":
        """Return the reviews carrying ``label`` as a corpus of their own."""
        return ReviewCorpus.from_reviews(
            (review for review in self.reviews if review.label == label), self.apps
        )

    def with_apps(self, apps: Mapping[str, AppMeta]) -> "ReviewCorpus":
        """Return a copy of the corpus with app metadata attached."""
        return ReviewCorpus.from_reviews(self.reviews, apps, self.skipped_count)

    def labels(self) -> tuple[Optional[Label], ...]:
        return tuple(review.label for review in self.reviews)


@dataclass(frozen=True)
class RawRecord:
    """One line of a corpus file after schema validation."""

    line_number: int
    raw: str
    review: Optional[Review]
    validation_errors: dict[str, str]


def read_review_records(path: Path) -> Iterator[RawRecord]:
    """
    Validate a newline-delimited corpus file line by line.

    Blank lines are ignored. Lines are numbered from 1.

    Parameters
    ----------
    path: Path
        A corpus file. Lines that are not valid UTF-8 count as invalid records.

    Yields
    ------
    RawRecord
        ``review`` is set when the line is valid, otherwise ``validation_errors`` holds
        the flattened schema errors.
    """
    for line in validate_jsonl(path, ReviewSchema):
        review = Review.from_schema(line.record) if line.record is not None else None
        yield RawRecord(line.line_number, line.raw, review, line.validation_errors)


def load_app_metadata(path: Path | str) -> dict[str, AppMeta]:
    """
    Load the optional app-metadata file (``app_id``, ``category``, ``price_cents``).

    Raises
    ------
    CorpusValidationError
        On the first invalid line.
    """
    apps: dict[str, AppMeta] = {}
    for line in validate_jsonl(path, AppMetaSchema):
        record = line.record
        if record is None:
            raise CorpusValidationError(line.line_number, line.validation_errors)
        apps[record.app_id] = AppMeta(
            record.app_id, record.category, record.price_cents
        )
    logger.info(f"Loaded metadata for {len(apps)} apps from '{path}'.")
    return apps


def load_reviews(
    path: Path | str,
    strict: bool = False,
    app_metadata_path: Optional[Path | str] = None,
) -> ReviewCorpus:
    """
    Load and validate a review corpus.

    Parameters
    ----------
    path: Path | str
        A ``.jsonl`` corpus file, or a ``.db`` store written by ``frl ingest``.
    strict: bool, default = False
        Reject the whole file on the first malformed record. Otherwise malformed
        records are skipped and counted in ``ReviewCorpus.skipped_count``.
    app_metadata_path: Path | str, optional
        App-metadata file to attach.

    Raises
    ------
    MissingInputError
        If ``path`` does not exist.
    CorpusValidationError
        On a malformed record in strict mode.
    DuplicateReviewError
        If a review_id repeats (in either mode).

    Returns
    -------
    ReviewCorpus
    """
    path = Path(path)
    if not path.exists():
        raise MissingInputError(f"Corpus file '{path}' does not exist.")

    if path.suffix == ".db":
        # Local import: the storage layer depends on this module.
        from fake_review_lab.db_operations import read_corpus

        corpus = read_corpus(path)
    else:
        reviews = []
        skipped = 0
        for record in read_review_records(path):
            if record.review is not None:
                reviews.append(record.review)
            elif strict:
                raise CorpusValidationError(
                    record.line_number, record.validation_errors
                )
            else:
                skipped += 1
                logger.debug(
                    f"Skipping line {record.line_number}: {record.validation_errors}"
                )
        corpus = ReviewCorpus.from_reviews(reviews, skipped_count=skipped)

    if app_metadata_path is not None:
        corpus = corpus.with_apps(load_app_metadata(app_metadata_path))

    logger.info(
        f"Loaded {len(corpus)} reviews from '{path}' "
        f"({len(corpus.reviewer_index)} reviewers, {len(corpus.app_index)} apps, "
        f"{corpus.skipped_count} skipped)."
    )
    return corpus


def _star_fractions(
    ratings: list[int],
) -> tuple[float, float, float, float, float]:
    counts = [0] * STAR_LEVELS
    for rating in ratings:
        counts[rating - 1] += 1
    total = len(ratings)
    one, two, three, four, five = (count / total for count in counts)
    return (one, two, three, four, five)


def build_profiles(
    corpus: ReviewCorpus,
) -> tuple[dict[str, ReviewerProfile], dict[str, AppProfile]]:
    """
    Aggregate a corpus into reviewer and app profiles.

    Parameters
    ----------
    corpus: ReviewCorpus

    Returns
    -------
    tuple[dict[str, ReviewerProfile], dict[str, AppProfile]]
        One profile per distinct reviewer and per distinct app. Both maps are empty
        for an empty corpus.
    """
    by_id = {review.review_id: review for review in corpus.reviews}

    reviewers: dict[str, ReviewerProfile] = {}
    for reviewer_id, review_ids in corpus.reviewer_index.items():
        reviews = [by_id[review_id] for review_id in review_ids]
        timestamps = sorted(review.timestamp for review in reviews)
        total = len(reviews)
        lifetime = timestamps[-1] - timestamps[0]
        reviewers[reviewer_id] = ReviewerProfile(
            reviewer_id=reviewer_id,
            total_reviews=total,
            per_star_fraction=_star_fractions([review.rating for review in reviews]),
            first_ts=timestamps[0],
            last_ts=timestamps[-1],
            account_lifetime_s=lifetime,
            review_frequency_s=lifetime / (total - 1) if total >= 2 else None,
        )

    apps: dict[str, AppProfile] = {}
    for app_id, review_ids in corpus.app_index.items():
        ratings = [by_id[review_id].rating for review_id in review_ids]
        meta = corpus.apps.get(app_id)
        apps[app_id] = AppProfile(
            app_id=app_id,
            total_reviews=len(ratings),
            per_star_fraction=_star_fractions(ratings),
            category=meta.category if meta else None,
            price_cents=meta.price_cents if meta else None,
        )

    logger.debug(f"Built {len(reviewers)} reviewer and {len(apps)} app profiles.")
    return reviewers, apps


def write_reviews(reviews: Iterable[Review], path: Path | str) -> int:
    """
    Write reviews in the corpus file format, one compact JSON object per line.

    Returns
    -------
    int
        Number of records written.
    """
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as file_handle:
        for review in reviews:
            file_handle.write(
                ReviewSchema.model_validate(review.to_record()).model_dump_json()
            )
            file_handle.write("\n")
            count += 1
    logger.info(f"Written {count} reviews to '{path}'.")
    return count
