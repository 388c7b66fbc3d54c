"""
Class-imbalance sweep.

A fixed set of fake samples is combined with growing prefixes of one shuffled regular
pool, from 90% fake down to 0.1% fake, and every algorithm is cross-validated on each
mix. Precision and F1 depend on the class ratio and are reported for completeness;
recall and AUC are the comparable columns.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from fake_review_lab.errors import InsufficientPoolError, ParameterError
from fake_review_lab.learner.metrics import MetricSummary
from fake_review_lab.learner.model_spec import ModelSpec
from fake_review_lab.learner.validation import CVConfig, cross_validate
from fake_review_lab.utils import derive_rng, derive_seed

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = [
    "skew",
    "algorithm",
    "precision",
    "recall",
    "f1",
    "auc",
    "n_fake",
    "n_regular",
]


def skew_grid(min_skew: float = 0.1) -> list[float]:
    """
    Fake percentages 90, 80, ..., 10, 9, ..., 1, 0.9, ..., 0.1, descending.

    Parameters
    ----------
    min_skew: float, default = 0.1
        Drop skews below this value, e.g. 1.0 for desk-scale runs.
    """
    grid = (
        [float(tens) for tens in range(90, 0, -10)]
        + [float(units) for units in range(9, 0, -1)]
        + [tenths / 10 for tenths in range(9, 0, -1)]
    )
    return [skew for skew in grid if skew >= min_skew]


def regular_count(n_fake: int, skew: float) -> int:
    """
    Regular samples needed so ``n_fake`` makes up ``skew`` percent of the data.

    ``n_fake * (100 - skew) / skew`` rounded half up on the exact decimal value of
    ``skew``, e.g. 8,000 fakes at 90% need 889 regular samples.
    """
    if not 0 < skew < 100:
        raise ParameterError(f"skew must be in (0, 100), got {skew}.")
    exact = Fraction(n_fake) * (100 - Fraction(str(skew))) / Fraction(str(skew))
    return math.floor(exact + Fraction(1, 2))


@dataclass(frozen=True)
class SweepRow:
    skew: float
    algorithm: str
    summary: MetricSummary
    n_fake: int
    n_regular: int

    def to_record(self) -> dict[str, object]:
        mean = self.summary.mean
        return {
            "skew": self.skew,
            "algorithm": self.algorithm,
            "precision": mean["precision"],
            "recall": mean["recall"],
            "f1": mean["f1"],
            "auc": mean["auc_roc"],
            "n_fake": self.n_fake,
            "n_regular": self.n_regular,
        }


def _run_cell(
    fakes: np.ndarray,
    regulars: np.ndarray,
    spec: ModelSpec,
    cv: CVConfig,
    skew: float,
) -> SweepRow:
    X = np.vstack([fakes, regulars])
    y = np.concatenate(
        [np.ones(len(fakes), dtype=np.int64), np.zeros(len(regulars), dtype=np.int64)]
    )
    result = cross_validate(X, y, spec, cv)
    return SweepRow(skew, spec.algorithm, result.summary, len(fakes), len(regulars))


def run_sweep(
    fakes: np.ndarray,
    regular_pool: np.ndarray,
    algorithms: list[ModelSpec],
    cv: CVConfig,
    seed: int,
    skews: Optional[list[float]] = None,
    workers: int = 1,
) -> list[SweepRow]:
    """
    Cross-validate every algorithm at every skew.

    Parameters
    ----------
    fakes: np.ndarray
        The fixed fake feature rows.
    regular_pool: np.ndarray
        Regular feature rows. Shuffled once with ``seed``; each skew uses a prefix of
        that order, so the regular data grows monotonically as the skew falls.
    algorithms: list[ModelSpec]
    cv: CVConfig
        Folds, repeats, scope and threshold. Its seed is replaced per skew so every
        algorithm sees the same folds at a given skew.
    seed: int
    skews: list[float], optional
        Defaults to ``skew_grid()``.
    workers: int, default = 1
        Cells run in parallel; rows come back in (skew, algorithm) order.

    Raises
    ------
    InsufficientPoolError
        If the pool cannot supply the most extreme skew.
    """
    skews = skews if skews is not None else skew_grid()
    if not skews or not algorithms:
        raise ParameterError("A sweep needs at least one skew and one algorithm.")
    n_fake = len(fakes)
    required = max(regular_count(n_fake, skew) for skew in skews)
    if required > len(regular_pool):
        raise InsufficientPoolError(required, len(regular_pool))

    order = derive_rng(seed, 0).permutation(len(regular_pool))
    cells = []
    for skew_index, skew in enumerate(skews):
        regulars = regular_pool[order[: regular_count(n_fake, skew)]]
        cell_cv = CVConfig(
            folds=cv.folds,
            repeats=cv.repeats,
            seed=derive_seed(seed, 1, skew_index),
            preprocess_scope=cv.preprocess_scope,
            threshold=cv.threshold,
        )
        cells.extend((regulars, spec, cell_cv, skew) for spec in algorithms)

    logger.info(
        f"Sweeping {len(skews)} skews x {len(algorithms)} algorithms "
        f"({n_fake} fakes, up to {required} regular)."
    )
    if workers > 1:
        rows = Parallel(n_jobs=workers)(
            delayed(_run_cell)(fakes, regulars, spec, cell_cv, skew)
            for regulars, spec, cell_cv, skew in cells
        )
    else:
        rows = [
            _run_cell(fakes, regulars, spec, cell_cv, skew)
            for regulars, spec, cell_cv, skew in cells
        ]
    return list(rows)


def sweep_frame(rows: list[SweepRow]) -> pd.DataFrame:
    return pd.DataFrame([row.to_record() for row in rows], columns=SWEEP_COLUMNS)
