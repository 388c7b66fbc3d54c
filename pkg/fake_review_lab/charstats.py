"""
Statistics comparing fake and regular reviews.

Pure functions over immutable inputs: rank correlation, rank deltas, the two-sample
t-test with Cohen's d, the Wilcoxon rank-sum test with effect size r, the 2x2
chi-square test and word / bi-gram rank comparisons. ``build_report`` runs all of them
over a labelled corpus.
"""

import logging
import math
import re
import statistics
from collections import Counter
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import asdict, dataclass, field
from typing import Any, Optional

import numpy as np
from scipy import stats as scipy_stats

from fake_review_lab.corpus import (
    SECONDS_PER_DAY,
    Label,
    ReviewCorpus,
    ReviewerProfile,
    build_profiles,
)
from fake_review_lab.errors import (
    DegenerateSampleError,
    InsufficientSamplesError,
    ParameterError,
    UndefinedCorrelationError,
)

logger = logging.getLogger(__name__)

# Exact enumeration of the rank-sum distribution up to this many observations.
EXACT_RANK_SUM_MAX_N = 20

# Embedded English stopword list. Negated contractions ("don't", "can't") are kept as
# content words.
STOPWORDS = frozenset(
    """
    a about above after again against all am an and any are as at be because been
    before being below between both but by could did do does doing down during each
    few for from further had has have having he her here hers herself him himself his
    how i i'd i'll i'm i've if in into is it it's its itself just let's me more most my
    myself no nor not now of off on once only or other ought our ours ourselves out
    over own same she she'd she'll she's should so some such than that that's the their
    theirs them themselves then there there's these they they'd they'll they're they've
    this those through to too under until up very was we we'd we'll we're we've were
    what what's when when's where where's which while who who's whom why why's will
    with would you you'd you'll you're you've your yours yourself yourselves
    """.split()
)

_NON_WORD = re.compile(r"[^\w\s']|_")

REVIEWER_BUCKETS: tuple[tuple[int, Optional[int], str], ...] = (
    (1, 1, "1"),
    (2, 5, "2-5"),
    (6, 10, "6-10"),
    (11, 50, "11-50"),
    (51, 100, "51-100"),
    (101, None, ">100"),
)
APP_BUCKETS: tuple[tuple[int, Optional[int], str], ...] = (
    (1, 1, "1"),
    (2, 9, "2-9"),
    (10, 99, "10-99"),
    (100, 999, "100-999"),
    (1000, None, ">=1000"),
)


@dataclass(frozen=True)
class TestResult:
    """
    Outcome of a statistical test.

    Attributes
    ----------
    statistic: float
        t, z, rho or chi-square depending on the test.
    p_value: float
        Two-tailed, in [0, 1].
    effect_size: float | None
        Cohen's d, r or phi where the test defines one.
    details: dict[str, Any]
        Test-specific extras, e.g. the rank sum and whether the p-value is exact.
    """

    __test__ = False  # Not a pytest test class.

    statistic: float
    p_value: float
    effect_size: Optional[float] = None
    details: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class CategoryRank:
    category: str
    rank_fake: int
    rank_official: int


@dataclass(frozen=True)
class RankDeltaRow:
    token: str
    rank_a: int
    rank_b: int
    delta: int


@dataclass(frozen=True)
class NgramComparison:
    common: list[RankDeltaRow]
    only_a: list[str]
    only_b: list[str]


def _clip_p(p_value: float) -> float:
    return float(min(1.0, max(0.0, p_value)))


def spearman(xs: Sequence[float], ys: Sequence[float]) -> TestResult:
    """
    Spearman rank correlation with average ranks for ties.

    The two-tailed p-value uses ``t = rho * sqrt((n - 2) / (1 - rho^2))`` with ``n - 2``
    degrees of freedom.

    Raises
    ------
    InsufficientSamplesError
        Lengths differ or are below 3.
    UndefinedCorrelationError
        Either sequence is constant.
    """
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or len(x) < 3:
        raise InsufficientSamplesError(
            "spearman needs two sequences of equal length >= 3."
        )
    rank_x = scipy_stats.rankdata(x)
    rank_y = scipy_stats.rankdata(y)
    if np.all(rank_x == rank_x[0]) or np.all(rank_y == rank_y[0]):
        raise UndefinedCorrelationError("Correlation of a constant sequence.")

    centred_x = rank_x - rank_x.mean()
    centred_y = rank_y - rank_y.mean()
    rho = float(
        np.sum(centred_x * centred_y)
        / math.sqrt(np.sum(centred_x**2) * np.sum(centred_y**2))
    )
    rho = max(-1.0, min(1.0, rho))

    n = len(x)
    if abs(rho) == 1.0:
        p_value = 0.0
        t_stat = math.copysign(math.inf, rho)
    else:
        t_stat = rho * math.sqrt((n - 2) / (1.0 - rho**2))
        p_value = 2.0 * float(scipy_stats.t.sf(abs(t_stat), n - 2))
    return TestResult(rho, _clip_p(p_value), None, {"n": n, "t": t_stat})


def rank_delta(rank_official: int, rank_fake: int) -> int:
    """Absolute rank difference ``|rank_official - rank_fake|``."""
    if rank_official < 1 or rank_fake < 1:
        raise ParameterError("Ranks start at 1.")
    return abs(rank_official - rank_fake)


def two_sample_t(a: Sequence[float], b: Sequence[float]) -> TestResult:
    """
    Student's two-sample t-test with pooled variance.

    ``effect_size`` is Cohen's d, the mean difference divided by the pooled standard
    deviation. Swapping ``a`` and ``b`` negates t and d.

    Raises
    ------
    InsufficientSamplesError
        Fewer than two observations in either sample.
    DegenerateSampleError
        The pooled variance is zero.
    """
    x = np.asarray(a, dtype=float)
    y = np.asarray(b, dtype=float)
    n_x, n_y = len(x), len(y)
    if n_x < 2 or n_y < 2:
        raise InsufficientSamplesError("two_sample_t needs at least 2 per sample.")

    dof = n_x + n_y - 2
    pooled_var = ((n_x - 1) * x.var(ddof=1) + (n_y - 1) * y.var(ddof=1)) / dof
    if pooled_var <= 0.0:
        raise DegenerateSampleError("Zero pooled variance.")

    mean_diff = float(x.mean() - y.mean())
    t_stat = mean_diff / math.sqrt(pooled_var * (1.0 / n_x + 1.0 / n_y))
    p_value = 2.0 * float(scipy_stats.t.sf(abs(t_stat), dof))
    cohens_d = mean_diff / math.sqrt(pooled_var)
    return TestResult(
        t_stat,
        _clip_p(p_value),
        cohens_d,
        {"dof": dof, "mean_a": float(x.mean()), "mean_b": float(y.mean())},
    )


def _exact_rank_sum_p(ranks: np.ndarray, n_a: int, observed: float) -> float:
    """
    Two-sided p-value of a rank sum by enumerating all rank assignments.

    Average ranks are multiples of 0.5, so the sums are counted on doubled integers.
    """
    doubled = np.rint(ranks * 2).astype(np.int64)
    total = int(doubled.sum())
    counts = np.zeros((n_a + 1, total + 1), dtype=np.float64)
    counts[0, 0] = 1.0
    for used, value in enumerate(doubled, start=1):
        for k in range(min(used, n_a), 0, -1):
            counts[k, value:] += counts[k - 1, : total + 1 - value]

    distribution = counts[n_a]
    sums = np.arange(total + 1)
    expected_doubled = n_a * (len(ranks) + 1)
    observed_dev = abs(round(observed * 2) - expected_doubled)
    extreme = np.abs(sums - expected_doubled) >= observed_dev
    return float(distribution[extreme].sum() / distribution.sum())


def wilcoxon_rank_sum(a: Sequence[float], b: Sequence[float]) -> TestResult:
    """
    Wilcoxon rank-sum test with average ranks for ties.

    ``statistic`` is the continuity-corrected, tie-corrected normal z of the rank sum
    of ``a``; ``effect_size`` is ``r = z / sqrt(n_a + n_b)``. With at most 20
    observations the p-value is exact (full enumeration), otherwise it comes from the
    normal approximation.
    """
    x = np.asarray(a, dtype=float)
    y = np.asarray(b, dtype=float)
    n_a, n_b = len(x), len(y)
    if n_a < 1 or n_b < 1:
        raise InsufficientSamplesError("wilcoxon_rank_sum needs non-empty samples.")

    n = n_a + n_b
    ranks = scipy_stats.rankdata(np.concatenate([x, y]))
    rank_sum = float(ranks[:n_a].sum())
    expected = n_a * (n + 1) / 2.0

    _, tie_sizes = np.unique(ranks, return_counts=True)
    tie_term = float(np.sum(tie_sizes.astype(float) ** 3 - tie_sizes))
    variance = n_a * n_b / 12.0 * ((n + 1) - (tie_term / (n * (n - 1)) if n > 1 else 0))
    deviation = rank_sum - expected
    if variance <= 0.0:
        z_stat = 0.0
    else:
        corrected = max(abs(deviation) - 0.5, 0.0)
        z_stat = math.copysign(corrected, deviation) / math.sqrt(variance)

    exact = n <= EXACT_RANK_SUM_MAX_N
    if exact:
        p_value = _exact_rank_sum_p(ranks, n_a, rank_sum)
    else:
        p_value = 2.0 * float(scipy_stats.norm.sf(abs(z_stat)))
    return TestResult(
        z_stat,
        _clip_p(p_value),
        z_stat / math.sqrt(n),
        {"rank_sum": rank_sum, "exact": exact},
    )


def chi_square_2x2(table: Sequence[Sequence[float]]) -> TestResult:
    """
    Pearson chi-square test of independence on a 2x2 table, 1 degree of freedom, no
    continuity correction. ``effect_size`` is phi.

    Raises
    ------
    DegenerateSampleError
        A row or column total is zero.
    """
    observed = np.asarray(table, dtype=float)
    if observed.shape != (2, 2) or np.any(observed < 0):
        raise ParameterError("Expected a 2x2 table of non-negative counts.")
    rows = observed.sum(axis=1)
    cols = observed.sum(axis=0)
    total = observed.sum()
    if np.any(rows == 0) or np.any(cols == 0):
        raise DegenerateSampleError("A 2x2 table marginal is zero.")
    expected = np.outer(rows, cols) / total
    chi2 = float(np.sum((observed - expected) ** 2 / expected))
    p_value = float(scipy_stats.chi2.sf(chi2, 1))
    return TestResult(chi2, _clip_p(p_value), math.sqrt(chi2 / total), {"dof": 1})


def tokenize(text: str) -> list[str]:
    """
    Strip punctuation, lowercase, split on whitespace and drop stopwords.

    Apostrophes inside words survive so "can't" stays one token; the underscore counts
    as punctuation.
    """
    cleaned = _NON_WORD.sub("", text.replace("’", "'").lower())
    tokens = (token.strip("'") for token in cleaned.split())
    return [token for token in tokens if token and token not in STOPWORDS]


def ngrams(tokens: list[str], n: int) -> list[str]:
    if n == 1:
        return tokens
    return [" ".join(tokens[i : i + n]) for i in range(len(tokens) - n + 1)]


def ranked_ngrams(texts: Iterable[str], n: int = 1) -> list[tuple[str, int]]:
    """
    Count n-grams over texts and sort by descending count, ties lexicographic.
    """
    counts: Counter[str] = Counter()
    for text in texts:
        counts.update(ngrams(tokenize(text), n))
    return sorted(counts.items(), key=lambda item: (-item[1], item[0]))


def ngram_rank_delta(
    corpus_a: Iterable[str],
    corpus_b: Iterable[str],
    n: int = 1,
    top_k: int = 100,
) -> NgramComparison:
    """
    Compare the ``top_k`` most common n-grams of two text collections.

    Parameters
    ----------
    corpus_a, corpus_b: Iterable[str]
        Review texts.
    n: int, default = 1
        1 for words, 2 for bi-grams.
    top_k: int, default = 100

    Returns
    -------
    NgramComparison
        ``common`` holds rank deltas (``rank_a - rank_b``) for n-grams in both top
        lists, in ``rank_a`` order; ``only_a`` / ``only_b`` hold the exclusive n-grams
        in rank order.
    """
    if n not in (1, 2):
        raise ParameterError(f"n must be 1 or 2, got {n}.")
    top_a = [token for token, _ in ranked_ngrams(corpus_a, n)[:top_k]]
    top_b = [token for token, _ in ranked_ngrams(corpus_b, n)[:top_k]]
    rank_b = {token: rank for rank, token in enumerate(top_b, start=1)}
    rank_a = {token: rank for rank, token in enumerate(top_a, start=1)}

    common = [
        RankDeltaRow(token, rank, rank_b[token], rank - rank_b[token])
        for rank, token in enumerate(top_a, start=1)
        if token in rank_b
    ]
    return NgramComparison(
        common=common,
        only_a=[token for token in top_a if token not in rank_b],
        only_b=[token for token in top_b if token not in rank_a],
    )


def category_ranks(counts: Mapping[str, int]) -> dict[str, int]:
    """
    Rank categories by app count, most apps first.

    Tied categories share the larger rank, e.g. two categories tied behind six others
    are both ranked 8 and rank 7 is unused.
    """
    categories = sorted(counts)
    values = np.array([counts[category] for category in categories], dtype=float)
    ranks = scipy_stats.rankdata(-values, method="max")
    return {category: int(rank) for category, rank in zip(categories, ranks)}


@dataclass(frozen=True)
class CategoryComparison:
    ranks: list[CategoryRank]
    deltas: list[tuple[str, int]]
    correlation: Optional[TestResult]


def compare_category_ranks(
    fake_counts: Mapping[str, int], official_counts: Mapping[str, int]
) -> CategoryComparison:
    """
    Rank both category distributions, correlate them and list per-category deltas.

    Deltas are sorted largest first, then by category name.
    """
    categories = sorted(set(fake_counts) | set(official_counts))
    fake_ranks = category_ranks({c: fake_counts.get(c, 0) for c in categories})
    official_ranks = category_ranks({c: official_counts.get(c, 0) for c in categories})
    ranks = [
        CategoryRank(category, fake_ranks[category], official_ranks[category])
        for category in categories
    ]
    deltas = sorted(
        (
            (row.category, rank_delta(row.rank_official, row.rank_fake))
            for row in ranks
        ),
        key=lambda item: (-item[1], item[0]),
    )
    correlation = _guarded(
        spearman,
        [row.rank_fake for row in ranks],
        [row.rank_official for row in ranks],
    )
    return CategoryComparison(ranks, deltas, correlation)


def bucket_shares(
    values: Iterable[int], buckets: Sequence[tuple[int, Optional[int], str]]
) -> dict[str, float]:
    """Share of ``values`` falling in each inclusive ``(low, high, label)`` bucket."""
    items = list(values)
    shares = {}
    for low, high, label in buckets:
        inside = sum(1 for v in items if v >= low and (high is None or v <= high))
        shares[label] = inside / len(items) if items else 0.0
    return shares


def word_count(text: str) -> int:
    return len(text.split())


def _guarded(
    test: Callable[..., TestResult], *samples: Sequence[float]
) -> Optional[TestResult]:
    try:
        return test(*samples)
    except (DegenerateSampleError, InsufficientSamplesError) as err:
        logger.warning(f"{test.__name__} skipped: {err}")
        return None


def _result_dict(result: Optional[TestResult]) -> Optional[dict[str, Any]]:
    return result.to_dict() if result is not None else None


def _describe(values: Sequence[float]) -> dict[str, Optional[float]]:
    if not values:
        return {"n": 0, "mean": None, "median": None}
    return {
        "n": len(values),
        "mean": float(statistics.fmean(values)),
        "median": float(statistics.median(values)),
    }


def _reviewer_groups(
    corpus: ReviewCorpus, reviewers: Mapping[str, ReviewerProfile]
) -> dict[Label, list[ReviewerProfile]]:
    """A reviewer is fake if any of their reviews is labelled fake."""
    labels_by_reviewer: dict[str, set[Optional[Label]]] = {}
    for review in corpus.reviews:
        labels_by_reviewer.setdefault(review.reviewer_id, set()).add(review.label)
    groups: dict[Label, list[ReviewerProfile]] = {Label.FAKE: [], Label.REGULAR: []}
    for reviewer_id, labels in labels_by_reviewer.items():
        if Label.FAKE in labels:
            groups[Label.FAKE].append(reviewers[reviewer_id])
        elif Label.REGULAR in labels:
            groups[Label.REGULAR].append(reviewers[reviewer_id])
    return groups


def _reviewer_section(corpus: ReviewCorpus) -> dict[str, Any]:
    reviewers, _ = build_profiles(corpus)
    groups = _reviewer_groups(corpus, reviewers)

    def column(label: Label, attribute: str) -> list[float]:
        values = [getattr(profile, attribute) for profile in groups[label]]
        return [float(v) for v in values if v is not None]

    section: dict[str, Any] = {}
    for name, attribute, scale in (
        ("total_reviews", "total_reviews", 1.0),
        ("review_frequency_days", "review_frequency_s", 1.0 / SECONDS_PER_DAY),
        ("account_lifetime_days", "account_lifetime_s", 1.0 / SECONDS_PER_DAY),
    ):
        fake = [v * scale for v in column(Label.FAKE, attribute)]
        regular = [v * scale for v in column(Label.REGULAR, attribute)]
        section[name] = {
            "fake": _describe(fake),
            "regular": _describe(regular),
            "t_test": _result_dict(_guarded(two_sample_t, fake, regular)),
        }
    section["review_count_buckets"] = {
        label.value: bucket_shares(
            (p.total_reviews for p in groups[label]), REVIEWER_BUCKETS
        )
        for label in (Label.FAKE, Label.REGULAR)
    }
    return section


def _review_section(fake: ReviewCorpus, regular: ReviewCorpus) -> dict[str, Any]:
    section: dict[str, Any] = {}
    section["rating_distribution"] = {
        name: {
            str(star): (
                sum(1 for r in part.reviews if r.rating == star) / len(part)
                if len(part)
                else 0.0
            )
            for star in range(1, 6)
        }
        for name, part in (("fake", fake), ("regular", regular))
    }

    for name, measure in (
        ("length_chars", lambda r: len(r.title) + len(r.body)),
        ("word_count", lambda r: word_count(r.title) + word_count(r.body)),
    ):
        fake_values = [float(measure(r)) for r in fake.reviews]
        regular_values = [float(measure(r)) for r in regular.reviews]
        section[name] = {
            "fake": _describe(fake_values),
            "regular": _describe(regular_values),
            "wilcoxon": _result_dict(
                _guarded(wilcoxon_rank_sum, fake_values, regular_values)
            ),
        }

    def vote_summary(part: ReviewCorpus) -> dict[str, Optional[float]]:
        helpful = sum(r.helpful_votes for r in part.reviews)
        unhelpful = sum(r.unhelpful_votes for r in part.reviews)
        voted = sum(1 for r in part.reviews if r.helpful_votes + r.unhelpful_votes)
        return {
            "share_with_votes": voted / len(part) if len(part) else None,
            "helpful_share": helpful / (helpful + unhelpful)
            if helpful + unhelpful
            else None,
        }

    section["votes"] = {
        "fake": vote_summary(fake),
        "regular": vote_summary(regular),
        "t_test": _result_dict(
            _guarded(
                two_sample_t,
                [float(r.helpful_votes + r.unhelpful_votes) for r in fake.reviews],
                [float(r.helpful_votes + r.unhelpful_votes) for r in regular.reviews],
            )
        ),
    }
    return section


def _app_section(corpus: ReviewCorpus) -> dict[str, Any]:
    _, apps = build_profiles(corpus)
    fake_app_ids = sorted({r.app_id for r in corpus.reviews if r.label == Label.FAKE})
    other_app_ids = sorted(set(apps) - set(fake_app_ids))

    section: dict[str, Any] = {
        "fake_affected_apps": len(fake_app_ids),
        "other_apps": len(other_app_ids),
        "review_count_buckets": {
            "fake_affected": bucket_shares(
                (apps[a].total_reviews for a in fake_app_ids), APP_BUCKETS
            ),
            "other": bucket_shares(
                (apps[a].total_reviews for a in other_app_ids), APP_BUCKETS
            ),
        },
    }

    fake_categories = Counter(
        apps[a].category for a in fake_app_ids if apps[a].category is not None
    )
    official_categories = Counter(
        profile.category for profile in apps.values() if profile.category is not None
    )
    if fake_categories and official_categories:
        comparison = compare_category_ranks(fake_categories, official_categories)
        section["categories"] = {
            "ranks": [asdict(row) for row in comparison.ranks],
            "rank_deltas": [
                {"category": category, "delta": delta}
                for category, delta in comparison.deltas
            ],
            "spearman": _result_dict(comparison.correlation),
        }

    fake_prices = [
        float(apps[a].price_cents or 0) / 100
        for a in fake_app_ids
        if apps[a].price_cents is not None
    ]
    other_prices = [
        float(apps[a].price_cents or 0) / 100
        for a in other_app_ids
        if apps[a].price_cents is not None
    ]
    if fake_prices and other_prices:
        section["prices"] = {
            "fake_affected_paid_share": sum(1 for p in fake_prices if p > 0)
            / len(fake_prices),
            "other_paid_share": sum(1 for p in other_prices if p > 0)
            / len(other_prices),
            "t_test": _result_dict(_guarded(two_sample_t, fake_prices, other_prices)),
        }
    return section


def build_report(corpus: ReviewCorpus, top_k: int = 100) -> dict[str, Any]:
    """
    Run every comparison over a labelled corpus.

    Parameters
    ----------
    corpus: ReviewCorpus
        Reviews labelled fake or regular (unlabelled reviews only contribute to
        reviewer and app aggregates).
    top_k: int, default = 100
        List length for the word and bi-gram comparisons.

    Returns
    -------
    dict[str, Any]
        JSON-ready report. Tests that cannot be computed on the data are ``None``.
    """
    fake = corpus.subset(Label.FAKE)
    regular = corpus.subset(Label.REGULAR)
    logger.info(
        f"Characterising {len(fake)} fake and {len(regular)} regular reviews."
    )

    def texts(part: ReviewCorpus) -> list[str]:
        return [f"{r.title} {r.body}" for r in part.reviews]

    report: dict[str, Any] = {
        "counts": {
            "fake_reviews": len(fake),
            "regular_reviews": len(regular),
            "reviewers": len(corpus.reviewer_index),
            "apps": len(corpus.app_index),
        },
        "reviewers": _reviewer_section(corpus),
        "reviews": _review_section(fake, regular),
        "apps": _app_section(corpus),
    }
    for name, n in (("words", 1), ("bigrams", 2)):
        comparison = ngram_rank_delta(texts(fake), texts(regular), n=n, top_k=top_k)
        report[name] = {
            "common": [asdict(row) for row in comparison.common],
            "only_fake": comparison.only_a,
            "only_regular": comparison.only_b,
        }
    return report
