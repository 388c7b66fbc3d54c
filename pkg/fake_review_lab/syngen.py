"""
Synthetic labelled corpora.

Two reviewer populations, fake and regular, are described by summary statistics:
reviews per reviewer, days between reviews, account lifetime, rating distribution,
review length and helpful votes. ``generate`` turns them into a
corpus with the same shape, so every stage can run without a crawled store corpus.

Distributions
-------------
- reviews per reviewer: geometric with the configured mean (minimum 1)
- gaps between a reviewer's reviews: exponential with the configured mean
- ratings: categorical over 1..5 stars
- length (title + body characters): log-normal with ``mu = ln(median)`` and
  ``sigma^2 = 2 ln(mean / median)``
- apps: Zipf-like preference over a population-specific ordering of the app pool

Account lifetime is not sampled; it follows from the count and the gaps.
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from joblib import Parallel, delayed

from fake_review_lab.corpus import (
    SECONDS_PER_DAY,
    AppMeta,
    Label,
    Review,
    ReviewCorpus,
)
from fake_review_lab.errors import ParameterError
from fake_review_lab.schemas import AppMetaSchema
from fake_review_lab.utils import FileHandler, derive_rng

logger = logging.getLogger(__name__)

# First review timestamp drawn from a nine-year window starting 2008-07-10 UTC.
STORE_OPENED_TS = 1_215_648_000
STORE_WINDOW_S = 9 * 365 * SECONDS_PER_DAY

STORE_CATEGORIES = (
    "Books",
    "Business",
    "Catalogs",
    "Education",
    "Entertainment",
    "Finance",
    "Food & Drink",
    "Games",
    "Health & Fitness",
    "Lifestyle",
    "Medical",
    "Music",
    "Navigation",
    "News",
    "Newsstand",
    "Photo & Video",
    "Productivity",
    "Reference",
    "Shopping",
    "Social Networking",
    "Sports",
    "Stickers",
    "Travel",
    "Utilities",
    "Weather",
)
PAID_PRICES_CENTS = (99, 199, 299, 499, 999)
PAID_SHARE = 0.2

_VOCABULARY_SEED = 20_170_101
_VOCABULARY_SIZE = 2_000
_LETTERS = np.array(list("abcdefghijklmnopqrstuvwxyz"))


@dataclass(frozen=True)
class PopulationParams:
    """
    Statistics of one reviewer population.

    ``rating_distribution`` is renormalised to sum to 1. ``mean_lifetime_days`` is
    recorded but not sampled.
    """

    mean_reviews_per_reviewer: float
    mean_frequency_days: float
    mean_lifetime_days: float
    rating_distribution: tuple[float, float, float, float, float]
    length_median_chars: float
    length_mean_chars: float
    vote_probability: float = 0.02
    helpful_share: float = 0.7
    app_zipf_exponent: float = 1.0

    def __post_init__(self) -> None:
        if self.mean_reviews_per_reviewer < 1:
            raise ParameterError("mean_reviews_per_reviewer must be >= 1.")
        if self.mean_frequency_days <= 0:
            raise ParameterError("mean_frequency_days must be positive.")
        if len(self.rating_distribution) != 5 or min(self.rating_distribution) < 0:
            raise ParameterError("rating_distribution needs 5 non-negative weights.")
        total = sum(self.rating_distribution)
        if total <= 0:
            raise ParameterError("rating_distribution must not be all zero.")
        if self.length_median_chars <= 0:
            raise ParameterError("length_median_chars must be positive.")
        if self.length_mean_chars < self.length_median_chars:
            raise ParameterError(
                f"Length mean {self.length_mean_chars} is below median "
                f"{self.length_median_chars}; a log-normal needs mean >= median."
            )
        if not 0 <= self.vote_probability <= 1 or not 0 <= self.helpful_share <= 1:
            raise ParameterError("vote_probability and helpful_share are shares.")
        if self.app_zipf_exponent < 0:
            raise ParameterError("app_zipf_exponent must be non-negative.")
        one, two, three, four, five = (w / total for w in self.rating_distribution)
        object.__setattr__(self, "rating_distribution", (one, two, three, four, five))

    @property
    def length_mu(self) -> float:
        return math.log(self.length_median_chars)

    @property
    def length_sigma(self) -> float:
        ratio = self.length_mean_chars / self.length_median_chars
        return math.sqrt(2.0 * math.log(ratio))


FAKE_DEFAULTS = PopulationParams(
    mean_reviews_per_reviewer=29.9,
    mean_frequency_days=78.8,
    mean_lifetime_days=622.3,
    rating_distribution=(0.006, 0.01, 0.05, 0.23, 0.70),
    length_median_chars=111.0,
    length_mean_chars=121.3,
    vote_probability=0.015,
    helpful_share=0.907,
    app_zipf_exponent=0.5,
)
REGULAR_DEFAULTS = PopulationParams(
    mean_reviews_per_reviewer=2.5,
    mean_frequency_days=328.9,
    mean_lifetime_days=331.3,
    rating_distribution=(0.10, 0.04, 0.06, 0.16, 0.65),
    length_median_chars=63.0,
    length_mean_chars=110.8,
    vote_probability=0.027,
    helpful_share=0.678,
    app_zipf_exponent=1.2,
)


def _vocabulary() -> list[str]:
    rng = np.random.default_rng(_VOCABULARY_SEED)
    lengths = rng.integers(2, 10, size=_VOCABULARY_SIZE)
    return ["".join(rng.choice(_LETTERS, size=int(n))) for n in lengths]


def _text(rng: np.random.Generator, vocabulary: list[str], n_chars: int) -> str:
    """Random words of exactly ``n_chars`` characters, no outer whitespace."""
    if n_chars <= 0:
        return ""
    words: list[str] = []
    length = -1
    while length < n_chars:
        word = vocabulary[int(rng.integers(len(vocabulary)))]
        words.append(word)
        length += len(word) + 1
    text = " ".join(words)[:n_chars]
    if text.endswith(" "):
        text = text[:-1] + "a"
    return text


def _app_weights(n_apps: int, exponent: float) -> np.ndarray:
    weights = 1.0 / np.arange(1, n_apps + 1, dtype=np.float64) ** exponent
    return weights / weights.sum()


@dataclass(frozen=True)
class _ReviewerPlan:
    population: int
    index: int
    reviewer_id: str


@dataclass(frozen=True)
class _Population:
    label: Label
    params: PopulationParams
    app_order: np.ndarray
    app_weights: np.ndarray = field(repr=False)


def _reviews_for(
    plan: _ReviewerPlan,
    population: _Population,
    vocabulary: list[str],
    app_ids: list[str],
    seed: int,
) -> list[dict[str, Any]]:
    params = population.params
    rng = derive_rng(seed, 1, plan.population, plan.index)
    count = int(rng.geometric(1.0 / params.mean_reviews_per_reviewer))
    mean_gap_s = params.mean_frequency_days * SECONDS_PER_DAY
    gaps = rng.exponential(mean_gap_s, size=count - 1)
    start = STORE_OPENED_TS + int(rng.integers(STORE_WINDOW_S))
    offsets = np.concatenate([[0.0], np.cumsum(gaps)]).round().astype(np.int64)
    timestamps = start + offsets

    ratings = rng.choice(5, size=count, p=np.asarray(params.rating_distribution)) + 1
    lengths = np.maximum(
        1, np.rint(rng.lognormal(params.length_mu, params.length_sigma, size=count))
    ).astype(np.int64)
    apps = population.app_order[
        rng.choice(len(app_ids), size=count, p=population.app_weights)
    ]

    records = []
    for position in range(count):
        total_chars = int(lengths[position])
        title_chars = min(total_chars // 4, 40)
        helpful = unhelpful = 0
        if rng.random() < params.vote_probability:
            votes = 1 + int(rng.poisson(1.0))
            helpful = int(rng.binomial(votes, params.helpful_share))
            unhelpful = votes - helpful
        records.append(
            {
                "reviewer_id": plan.reviewer_id,
                "app_id": app_ids[int(apps[position])],
                "title": _text(rng, vocabulary, title_chars),
                "body": _text(rng, vocabulary, total_chars - title_chars),
                "rating": int(ratings[position]),
                "timestamp": int(timestamps[position]),
                "helpful_votes": helpful,
                "unhelpful_votes": unhelpful,
                "label": population.label,
            }
        )
    return records


def _app_metadata(app_ids: list[str], seed: int) -> dict[str, AppMeta]:
    rng = derive_rng(seed, 3)
    category_weights = _app_weights(len(STORE_CATEGORIES), 1.0)
    category_order = rng.permutation(len(STORE_CATEGORIES))
    apps = {}
    for app_id in app_ids:
        category = STORE_CATEGORIES[
            int(category_order[rng.choice(len(STORE_CATEGORIES), p=category_weights)])
        ]
        price = 0
        if rng.random() < PAID_SHARE:
            price = int(rng.choice(PAID_PRICES_CENTS))
        apps[app_id] = AppMeta(app_id, category, price)
    return apps


def generate(
    fake: PopulationParams = FAKE_DEFAULTS,
    regular: PopulationParams = REGULAR_DEFAULTS,
    n_fake_reviewers: int = 100,
    n_regular_reviewers: int = 1000,
    n_apps: int = 500,
    seed: int = 0,
    workers: int = 1,
) -> ReviewCorpus:
    """
    Generate a labelled corpus.

    Parameters
    ----------
    fake, regular: PopulationParams
        Default to the measured fake and regular populations.
    n_fake_reviewers, n_regular_reviewers: int
        Either may be 0.
    n_apps: int
        Size of the shared app pool.
    seed: int
    workers: int, default = 1
        Reviewers are generated in parallel from per-reviewer seeds; the corpus does
        not depend on this value.

    Returns
    -------
    ReviewCorpus
        Every review labelled with its population, with app metadata attached.
        Reviewer ids are shuffled across populations and do not reveal the label.
    """
    if n_fake_reviewers < 0 or n_regular_reviewers < 0:
        raise ParameterError("Reviewer counts must be non-negative.")
    if n_fake_reviewers + n_regular_reviewers == 0:
        raise ParameterError("At least one reviewer is required.")
    if n_apps < 1:
        raise ParameterError("n_apps must be >= 1.")

    app_ids = [f"app{index:06d}" for index in range(n_apps)]
    populations = [
        _Population(
            label,
            params,
            derive_rng(seed, 2, position).permutation(n_apps),
            _app_weights(n_apps, params.app_zipf_exponent),
        )
        for position, (label, params) in enumerate(
            ((Label.FAKE, fake), (Label.REGULAR, regular))
        )
    ]

    n_reviewers = n_fake_reviewers + n_regular_reviewers
    reviewer_numbers = derive_rng(seed, 0).permutation(n_reviewers)
    plans = [
        _ReviewerPlan(0, index, f"user{int(reviewer_numbers[index]):07d}")
        for index in range(n_fake_reviewers)
    ] + [
        _ReviewerPlan(
            1, index, f"user{int(reviewer_numbers[n_fake_reviewers + index]):07d}"
        )
        for index in range(n_regular_reviewers)
    ]

    vocabulary = _vocabulary()
    if workers > 1:
        batches = Parallel(n_jobs=workers)(
            delayed(_reviews_for)(
                plan, populations[plan.population], vocabulary, app_ids, seed
            )
            for plan in plans
        )
    else:
        batches = [
            _reviews_for(plan, populations[plan.population], vocabulary, app_ids, seed)
            for plan in plans
        ]

    reviews = []
    for batch in batches:
        for record in batch:
            reviews.append(Review(review_id=f"rev{len(reviews):09d}", **record))

    corpus = ReviewCorpus.from_reviews(reviews, _app_metadata(app_ids, seed))
    logger.info(
        f"Generated {len(corpus)} reviews from {n_fake_reviewers} fake and "
        f"{n_regular_reviewers} regular reviewers over {n_apps} apps (seed {seed})."
    )
    return corpus


def write_params_sidecar(
    path: Path | str,
    fake: PopulationParams,
    regular: PopulationParams,
    counts: dict[str, int],
    seed: int,
) -> None:
    """Write the generator parameters next to a generated corpus."""
    FileHandler.write_json(
        {
            "fake": asdict(fake),
            "regular": asdict(regular),
            "counts": counts,
            "seed": seed,
        },
        path,
    )


def write_app_metadata(corpus: ReviewCorpus, path: Path | str) -> int:
    """Write the corpus app metadata in the app-metadata file format."""
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as file_handle:
        for app_id in sorted(corpus.apps):
            meta = corpus.apps[app_id]
            record = AppMetaSchema(
                app_id=meta.app_id,
                category=meta.category,
                price_cents=meta.price_cents,
            )
            file_handle.write(record.model_dump_json())
            file_handle.write("\n")
            count += 1
    logger.info(f"Written metadata for {count} apps to '{path}'.")
    return count
