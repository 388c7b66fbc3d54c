"""
Duplicate removal and candidate matching against a store corpus.

Candidates are review texts recovered from outside the store (for example from
screenshots posted on a review exchange portal). Each is looked up in the corpus first
exactly and then by bounded Levenshtein distance on the normalised ``title\\nbody``
text. Ties at the smallest distance are reported as ``ambiguous`` rather than broken.
"""

import logging
import unicodedata
from collections import Counter, defaultdict
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import NamedTuple, Optional

import pandas as pd
from joblib import Parallel, delayed

from fake_review_lab.corpus import ReviewCorpus
from fake_review_lab.errors import CorpusValidationError, ParameterError
from fake_review_lab.schemas import CandidateSchema, validate_jsonl

logger = logging.getLogger(__name__)

DEFAULT_MAX_DISTANCE = 10
MATCH_COLUMNS = ["candidate_id", "matched_review_id", "distance", "method"]


class MatchMethod(str, Enum):
    EXACT = "exact"
    FUZZY = "fuzzy"
    AMBIGUOUS = "ambiguous"
    NONE = "none"


class Candidate(NamedTuple):
    id: str
    title: str
    body: str


@dataclass(frozen=True, slots=True)
class MatchResult:
    """
    Outcome of matching one candidate.

    ``distance`` is 0 for exact matches, the edit count for fuzzy and ambiguous
    matches, and ``None`` when nothing lies within the cap.
    """

    candidate_id: str
    matched_review_id: Optional[str]
    distance: Optional[int]
    method: MatchMethod


def normalize_text(text: str) -> str:
    """
    Canonical form used for duplicate detection and matching.

    Unicode NFC composition, leading/trailing whitespace removed and every internal run
    of whitespace collapsed to one space.
    """
    return " ".join(unicodedata.normalize("NFC", text).split())


def review_text(title: str, body: str) -> str:
    return f"{normalize_text(title)}\n{normalize_text(body)}"


def dedup(corpus: ReviewCorpus) -> tuple[ReviewCorpus, int]:
    """
    Remove every review whose normalised (title, body) pair occurs more than once.

    Whole duplicate groups are removed, not all-but-one.

    Parameters
    ----------
    corpus: ReviewCorpus

    Returns
    -------
    tuple[ReviewCorpus, int]
        The remaining corpus and the number of reviews removed.
    """
    keys = {
        review.review_id: (normalize_text(review.title), normalize_text(review.body))
        for review in corpus.reviews
    }
    occurrences = Counter(keys.values())
    kept = [
        review for review in corpus.reviews if occurrences[keys[review.review_id]] == 1
    ]
    removed = len(corpus) - len(kept)
    logger.info(f"Removed {removed} duplicate reviews, {len(kept)} remain.")
    return ReviewCorpus.from_reviews(kept, corpus.apps, corpus.skipped_count), removed


def levenshtein_bounded(a: str, b: str, cap: int) -> Optional[int]:
    """
    Levenshtein distance between ``a`` and ``b`` if it is at most ``cap``.

    Only the diagonal band of width ``2 * cap + 1`` of the dynamic-programming matrix
    is filled and the computation stops as soon as a whole row exceeds ``cap``.

    Parameters
    ----------
    a, b: str
    cap: int
        Non-negative upper bound.

    Returns
    -------
    int | None
        The exact distance, or ``None`` when it is greater than ``cap``.
    """
    if cap < 0:
        raise ParameterError(f"cap must be non-negative, got {cap}.")
    if a == b:
        return 0
    if len(a) > len(b):
        a, b = b, a
    n, m = len(a), len(b)
    if m - n > cap:
        return None

    # Common prefix and suffix never change the distance.
    start = 0
    while start < n and a[start] == b[start]:
        start += 1
    a, b = a[start:], b[start:]
    end = 0
    while end < len(a) and a[-1 - end] == b[-1 - end]:
        end += 1
    if end:
        a, b = a[:-end], b[:-end]
    n, m = len(a), len(b)
    if n == 0:
        return m if m <= cap else None

    over = cap + 1
    previous = [j if j <= cap else over for j in range(m + 1)]
    for i in range(1, n + 1):
        current = [over] * (m + 1)
        current[0] = i if i <= cap else over
        row_min = current[0]
        char_a = a[i - 1]
        for j in range(max(1, i - cap), min(m, i + cap) + 1):
            value = previous[j - 1] + (char_a != b[j - 1])
            if previous[j] + 1 < value:
                value = previous[j] + 1
            if current[j - 1] + 1 < value:
                value = current[j - 1] + 1
            if value > over:
                value = over
            current[j] = value
            if value < row_min:
                row_min = value
        if row_min > cap:
            return None
        previous = current

    distance = previous[m]
    return distance if distance <= cap else None


class CorpusTextIndex:
    """
    Normalised corpus texts indexed for exact lookup and by length.

    The length buckets implement the pre-filter: a text whose length differs from the
    candidate's by more than the cap cannot be within the cap.
    """

    def __init__(self, corpus: ReviewCorpus) -> None:
        self.exact: dict[str, list[str]] = defaultdict(list)
        self.by_length: dict[int, list[tuple[str, str]]] = defaultdict(list)
        for review in corpus.reviews:
            text = review_text(review.title, review.body)
            self.exact[text].append(review.review_id)
            self.by_length[len(text)].append((review.review_id, text))

    def match(self, candidate: Candidate, cap: int) -> MatchResult:
        text = review_text(candidate.title, candidate.body)

        exact_ids = self.exact.get(text, [])
        if len(exact_ids) == 1:
            return MatchResult(candidate.id, exact_ids[0], 0, MatchMethod.EXACT)
        if len(exact_ids) > 1:
            return MatchResult(candidate.id, None, 0, MatchMethod.AMBIGUOUS)

        best: Optional[int] = None
        best_ids: list[str] = []
        for length in range(len(text) - cap, len(text) + cap + 1):
            for review_id, corpus_text in self.by_length.get(length, []):
                bound = cap if best is None else best
                distance = levenshtein_bounded(text, corpus_text, bound)
                if distance is None:
                    continue
                if best is None or distance < best:
                    best, best_ids = distance, [review_id]
                elif distance == best:
                    best_ids.append(review_id)

        if best is None:
            return MatchResult(candidate.id, None, None, MatchMethod.NONE)
        if len(best_ids) > 1:
            return MatchResult(candidate.id, None, best, MatchMethod.AMBIGUOUS)
        return MatchResult(candidate.id, best_ids[0], best, MatchMethod.FUZZY)


def _match_chunk(
    index: CorpusTextIndex, candidates: list[Candidate], cap: int
) -> list[MatchResult]:
    return [index.match(candidate, cap) for candidate in candidates]


def match_reviews(
    candidates: list[Candidate] | list[tuple[str, str, str]],
    corpus: ReviewCorpus,
    cap: int = DEFAULT_MAX_DISTANCE,
    workers: int = 1,
) -> list[MatchResult]:
    """
    Match candidate texts against a (deduplicated) corpus.

    Parameters
    ----------
    candidates: list of (id, title, body)
    corpus: ReviewCorpus
        Should have been passed through ``dedup`` first.
    cap: int, default = 10
        Largest edit distance accepted as a fuzzy match.
    workers: int, default = 1
        Parallel workers. Results are in candidate order for any value.

    Returns
    -------
    list[MatchResult]
        One result per candidate, in input order.
    """
    if cap < 0:
        raise ParameterError(f"cap must be non-negative, got {cap}.")
    items = [Candidate(*candidate) for candidate in candidates]
    index = CorpusTextIndex(corpus)

    if workers <= 1 or len(items) < 2:
        results = _match_chunk(index, items, cap)
    else:
        chunk_size = max(1, -(-len(items) // (workers * 4)))
        chunks = [
            items[start : start + chunk_size]
            for start in range(0, len(items), chunk_size)
        ]
        nested = Parallel(n_jobs=workers)(
            delayed(_match_chunk)(index, chunk, cap) for chunk in chunks
        )
        results = [result for chunk_results in nested for result in chunk_results]

    methods = Counter(result.method.value for result in results)
    logger.info(f"Matched {len(results)} candidates: {dict(sorted(methods.items()))}")
    return results


def load_candidates(path: Path | str) -> list[Candidate]:
    """
    Load a newline-delimited candidate file (``id``, ``title``, ``body``).

    Raises
    ------
    CorpusValidationError
        On the first invalid line.
    """
    candidates = []
    for line in validate_jsonl(path, CandidateSchema):
        record = line.record
        if record is None:
            raise CorpusValidationError(line.line_number, line.validation_errors)
        candidates.append(Candidate(record.id, record.title, record.body))
    logger.info(f"Loaded {len(candidates)} candidates from '{path}'.")
    return candidates


def match_results_frame(results: list[MatchResult]) -> pd.DataFrame:
    frame = pd.DataFrame(
        [
            {
                "candidate_id": result.candidate_id,
                "matched_review_id": result.matched_review_id,
                "distance": result.distance,
                "method": result.method.value,
            }
            for result in results
        ],
        columns=MATCH_COLUMNS,
    )
    frame["distance"] = frame["distance"].astype("Int64")
    return frame
