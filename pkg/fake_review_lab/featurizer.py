"""
Feature extraction and preprocessing.

Every review becomes a 15-dimensional vector built from its reviewer profile, its app
profile and its own length. Preprocessing scales each sample to unit norm and then
standardises every feature with statistics fitted on training data only.
"""

import hashlib
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd

from fake_review_lab.config import DEFAULT_STORE_LIFETIME_S
from fake_review_lab.corpus import (
    AppProfile,
    Label,
    Review,
    ReviewCorpus,
    ReviewerProfile,
    build_profiles,
)
from fake_review_lab.errors import (
    DimensionMismatchError,
    InsufficientSamplesError,
    ProfileMismatchError,
)

logger = logging.getLogger(__name__)

FEATURE_COLUMNS: tuple[str, ...] = (
    "reviewer_total",
    "reviewer_star1",
    "reviewer_star2",
    "reviewer_star3",
    "reviewer_star4",
    "reviewer_star5",
    "reviewer_frequency_s",
    "account_usage_s",
    "app_total",
    "app_star1",
    "app_star2",
    "app_star3",
    "app_star4",
    "app_star5",
    "review_length_chars",
)
N_FEATURES = len(FEATURE_COLUMNS)
LABEL_COLUMN = "label"
# Relative to max(1, |mean|); smaller standard deviations count as zero.
CONSTANT_SD_RTOL = 1e-12


@dataclass(frozen=True, slots=True)
class FeatureVector:
    """
    The features of one review, in ``FEATURE_COLUMNS`` order.
    """

    reviewer_total: float
    reviewer_star_frac: tuple[float, float, float, float, float]
    reviewer_frequency_s: float
    account_usage_s: float
    app_total: float
    app_star_frac: tuple[float, float, float, float, float]
    review_length_chars: float
    label: Optional[Label] = None

    def values(self) -> tuple[float, ...]:
        return (
            self.reviewer_total,
            *self.reviewer_star_frac,
            self.reviewer_frequency_s,
            self.account_usage_s,
            self.app_total,
            *self.app_star_frac,
            self.review_length_chars,
        )


def extract_features(
    review: Review,
    reviewer: ReviewerProfile,
    app: AppProfile,
    store_lifetime_s: int = DEFAULT_STORE_LIFETIME_S,
) -> FeatureVector:
    """
    Build the feature vector of one review.

    Parameters
    ----------
    review: Review
    reviewer: ReviewerProfile
        Profile of ``review.reviewer_id``.
    app: AppProfile
        Profile of ``review.app_id``.
    store_lifetime_s: int, default = 283,824,000
        Frequency used for reviewers with a single review.

    Raises
    ------
    ProfileMismatchError
        If either profile belongs to another reviewer or app.
    """
    if reviewer.reviewer_id != review.reviewer_id:
        raise ProfileMismatchError(
            f"Review '{review.review_id}' is by '{review.reviewer_id}', "
            f"profile is for '{reviewer.reviewer_id}'."
        )
    if app.app_id != review.app_id:
        raise ProfileMismatchError(
            f"Review '{review.review_id}' is for app '{review.app_id}', "
            f"profile is for '{app.app_id}'."
        )

    frequency = reviewer.review_frequency_s
    return FeatureVector(
        reviewer_total=float(reviewer.total_reviews),
        reviewer_star_frac=reviewer.per_star_fraction,
        reviewer_frequency_s=float(
            frequency if frequency is not None else store_lifetime_s
        ),
        account_usage_s=float(reviewer.account_lifetime_s),
        app_total=float(app.total_reviews),
        app_star_frac=app.per_star_fraction,
        review_length_chars=float(len(review.title) + len(review.body)),
        label=review.label,
    )


@dataclass(frozen=True)
class FeatureTable:
    """
    A feature matrix with its labels.

    Attributes
    ----------
    matrix: np.ndarray
        ``n x 15`` float64.
    labels: tuple[Label | None, ...]
    """

    matrix: np.ndarray
    labels: tuple[Optional[Label], ...]

    def __post_init__(self) -> None:
        if self.matrix.ndim != 2 or self.matrix.shape[1] != N_FEATURES:
            raise DimensionMismatchError(
                f"Expected an n x {N_FEATURES} matrix, got {self.matrix.shape}."
            )
        if len(self.labels) != self.matrix.shape[0]:
            raise DimensionMismatchError("One label per row is required.")

    def __len__(self) -> int:
        return len(self.labels)

    def targets(self) -> np.ndarray:
        """Labels as integers, 1 for fake and 0 for regular."""
        if any(label is None for label in self.labels):
            raise InsufficientSamplesError("Feature table contains unlabelled rows.")
        return np.array([label == Label.FAKE for label in self.labels], dtype=np.int64)

    def subset(self, label: Label) -> "FeatureTable":
        mask = np.array([row_label == label for row_label in self.labels], dtype=bool)
        return FeatureTable(
            self.matrix[mask], tuple(lab for lab in self.labels if lab == label)
        )

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.matrix, columns=list(FEATURE_COLUMNS))
        frame[LABEL_COLUMN] = [
            label.value if label is not None else None for label in self.labels
        ]
        return frame


def featurize_corpus(
    corpus: ReviewCorpus, store_lifetime_s: int = DEFAULT_STORE_LIFETIME_S
) -> FeatureTable:
    """
    Extract the features of every review of a corpus, in corpus order.
    """
    reviewers, apps = build_profiles(corpus)
    vectors = [
        extract_features(
            review, reviewers[review.reviewer_id], apps[review.app_id], store_lifetime_s
        )
        for review in corpus.reviews
    ]
    matrix = np.array([vector.values() for vector in vectors], dtype=np.float64)
    logger.info(f"Extracted features for {len(vectors)} reviews.")
    return FeatureTable(
        matrix.reshape(len(vectors), N_FEATURES),
        tuple(vector.label for vector in vectors),
    )


def write_features(table: FeatureTable, path: Path | str) -> None:
    """Write the 15 feature columns plus ``label`` as CSV."""
    table.to_frame().to_csv(path, index=False, lineterminator="\n", encoding="utf-8")
    logger.info(f"Written {len(table)} feature rows to '{path}'.")


def read_features(path: Path | str) -> FeatureTable:
    """
    Read a feature CSV written by ``write_features``.

    Raises
    ------
    DimensionMismatchError
        If the columns are not the 15 feature columns followed by ``label``.
    """
    frame = pd.read_csv(path, keep_default_na=False, dtype={LABEL_COLUMN: str})
    expected = [*FEATURE_COLUMNS, LABEL_COLUMN]
    if list(frame.columns) != expected:
        raise DimensionMismatchError(
            f"'{path}' has columns {list(frame.columns)}, expected {expected}."
        )
    labels = tuple(Label(value) if value else None for value in frame[LABEL_COLUMN])
    matrix = frame[list(FEATURE_COLUMNS)].to_numpy(dtype=np.float64)
    return FeatureTable(matrix.reshape(len(labels), N_FEATURES), labels)


def normalize_rows(matrix: np.ndarray) -> np.ndarray:
    """
    Scale every non-zero row to unit Euclidean norm. All-zero rows are unchanged.
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    safe = np.where(norms == 0.0, 1.0, norms)
    return matrix / safe


def fingerprint(matrix: np.ndarray) -> str:
    """SHA-256 of the float64 bytes of a matrix and its shape."""
    data = np.ascontiguousarray(matrix, dtype=np.float64)
    digest = hashlib.sha256(str(data.shape).encode())
    digest.update(data.tobytes())
    return digest.hexdigest()


@dataclass(frozen=True)
class ScalerState:
    """
    Per-feature mean and population standard deviation.

    A standard deviation within ``CONSTANT_SD_RTOL`` of zero, relative to the mean, is
    stored as 0 and treated as 1 when transforming, so constant features come out
    centred.
    """

    mean: tuple[float, ...]
    sd: tuple[float, ...]
    fitted_on: str

    @classmethod
    def fit(cls, matrix: np.ndarray) -> "ScalerState":
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] < 2:
            raise InsufficientSamplesError("Fitting a scaler needs at least 2 rows.")
        mean = matrix.mean(axis=0)
        sd = matrix.std(axis=0)
        # Rounding noise on a constant column must not be blown up to unit variance.
        sd = np.where(sd <= CONSTANT_SD_RTOL * np.maximum(1.0, np.abs(mean)), 0.0, sd)
        return cls(
            mean=tuple(float(v) for v in mean),
            sd=tuple(float(v) for v in sd),
            fitted_on=fingerprint(matrix),
        )

    def transform(self, matrix: np.ndarray) -> np.ndarray:
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[1] != len(self.mean):
            raise DimensionMismatchError(
                f"Scaler fitted on {len(self.mean)} features, got {matrix.shape}."
            )
        sd = np.asarray(self.sd)
        return (matrix - np.asarray(self.mean)) / np.where(sd == 0.0, 1.0, sd)

    def to_dict(self) -> dict[str, object]:
        return {
            "mean": list(self.mean),
            "sd": list(self.sd),
            "fitted_on": self.fitted_on,
        }

    @classmethod
    def from_dict(cls, data: dict[str, object]) -> "ScalerState":
        mean = data["mean"]
        sd = data["sd"]
        assert isinstance(mean, list) and isinstance(sd, list)
        return cls(
            tuple(float(v) for v in mean),
            tuple(float(v) for v in sd),
            str(data["fitted_on"]),
        )


def standardize(
    fit_matrix: np.ndarray, apply_matrix: np.ndarray
) -> tuple[ScalerState, np.ndarray]:
    """
    Fit a scaler on ``fit_matrix`` and apply it to ``apply_matrix``.

    Returns
    -------
    tuple[ScalerState, np.ndarray]
    """
    state = ScalerState.fit(fit_matrix)
    return state, state.transform(apply_matrix)


def preprocess_split(
    train: np.ndarray, test: np.ndarray
) -> tuple[np.ndarray, np.ndarray, ScalerState]:
    """
    Unit-norm both parts, then standardise with statistics of the training part.
    """
    train_rows = normalize_rows(train)
    state, test_out = standardize(train_rows, normalize_rows(test))
    return state.transform(train_rows), test_out, state


def preprocess_global(matrix: np.ndarray) -> tuple[np.ndarray, ScalerState]:
    """Unit-norm and standardise a whole dataset with its own statistics."""
    rows = normalize_rows(matrix)
    state = ScalerState.fit(rows)
    return state.transform(rows), state
