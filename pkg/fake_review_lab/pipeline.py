"""
Pipeline stages behind the CLI subcommands.

Every stage reads its inputs, runs the domain functions, writes its artifact and an
``<artifact>.manifest.json`` next to it. Collaborators are injected with defaults so
tests can replace them.
"""

import logging
import time
from collections.abc import Sequence
from pathlib import Path
from typing import Any, Literal, Optional

import numpy as np
import pandas as pd

from fake_review_lab.charstats import build_report
from fake_review_lab.config import DEFAULT_STORE_LIFETIME_S
from fake_review_lab.corpus import (
    Label,
    RawRecord,
    ReviewCorpus,
    load_app_metadata,
    load_reviews,
    read_review_records,
    write_reviews,
)
from fake_review_lab.db_operations import (
    create_database,
    get_session,
    list_rejected_records,
    write_corpus,
)
from fake_review_lab.errors import (
    CorpusValidationError,
    InsufficientSamplesError,
    MissingInputError,
)
from fake_review_lab.featurizer import (
    FEATURE_COLUMNS,
    FeatureTable,
    featurize_corpus,
    read_features,
    write_features,
)
from fake_review_lab.learner.importance import ImportanceMethod, feature_importance
from fake_review_lab.learner.metrics import auc_roc, evaluate
from fake_review_lab.learner.model_spec import (
    FittedClassifier,
    ModelSpec,
    fit_classifier,
)
from fake_review_lab.learner.persistence import load_model, save_model
from fake_review_lab.learner.selection import (
    DEFAULT_GRID,
    grid_search,
    params_row,
    rfecv,
)
from fake_review_lab.learner.validation import CVConfig, cross_validate
from fake_review_lab.matcher import (
    DEFAULT_MAX_DISTANCE,
    MatchResult,
    dedup,
    load_candidates,
    match_reviews,
    match_results_frame,
)
from fake_review_lab.sweeper import SweepRow, run_sweep, skew_grid, sweep_frame
from fake_review_lab.syngen import (
    FAKE_DEFAULTS,
    REGULAR_DEFAULTS,
    PopulationParams,
    generate,
    write_app_metadata,
    write_params_sidecar,
)
from fake_review_lab.types import (
    CreateDbFn,
    CrossValidateFn,
    FeaturizeFn,
    LoadCorpusFn,
    ReadFeaturesFn,
    SessionFn,
)
from fake_review_lab.utils import FileHandler, derive_rng, write_manifest

logger = logging.getLogger(__name__)


def require_inputs(*paths: Optional[Path | str]) -> None:
    """
    Raises
    ------
    MissingInputError
        Naming the first input that does not exist.
    """
    for path in paths:
        if path is not None and not Path(path).exists():
            raise MissingInputError(f"Input file '{path}' does not exist.")


def _sibling(path: Path | str, suffix: str) -> Path:
    """``report.json`` + ``.words.csv`` -> ``report.words.csv``."""
    path = Path(path)
    return path.with_name(path.stem + suffix)


def run_ingest(
    corpus_path: Path | str,
    db_path: Path | str,
    apps_path: Optional[Path | str] = None,
    strict: bool = False,
    get_session_func: SessionFn = get_session,
    create_db_func: CreateDbFn = create_database,
) -> ReviewCorpus:
    """
    Validate a corpus file and persist it, with rejected records, to a SQLite store.

    An existing store at ``db_path`` is replaced.
    """
    started = time.perf_counter()
    require_inputs(corpus_path, apps_path)

    valid = []
    rejected: list[RawRecord] = []
    for record in read_review_records(Path(corpus_path)):
        if record.review is not None:
            valid.append(record.review)
        elif strict:
            raise CorpusValidationError(record.line_number, record.validation_errors)
        else:
            rejected.append(record)
    apps = load_app_metadata(apps_path) if apps_path is not None else None
    corpus = ReviewCorpus.from_reviews(valid, apps, skipped_count=len(rejected))

    Path(db_path).unlink(missing_ok=True)
    create_db_func(db_path)
    with get_session_func(db_path) as session:
        write_corpus(session, corpus, rejected, source=str(corpus_path))
        try:
            logger.info("Committing session")
            session.commit()
        except Exception as err:
            session.rollback()
            logger.info(f"Error occurred committing session: {err}")
            raise err

    write_manifest(
        db_path,
        "ingest",
        [p for p in (corpus_path, apps_path) if p is not None],
        {"strict": strict, "reviews": len(corpus), "rejected": len(rejected)},
        None,
        started,
    )
    return corpus


def run_match(
    candidates_path: Path | str,
    corpus_path: Path | str,
    out_path: Path | str,
    cap: int = DEFAULT_MAX_DISTANCE,
    workers: int = 1,
    load_corpus_func: LoadCorpusFn = load_reviews,
) -> list[MatchResult]:
    """Deduplicate the corpus, match every candidate and write the result CSV."""
    started = time.perf_counter()
    require_inputs(candidates_path, corpus_path)
    corpus, removed = dedup(load_corpus_func(corpus_path, False, None))
    results = match_reviews(load_candidates(candidates_path), corpus, cap, workers)
    FileHandler.write_csv(match_results_frame(results), out_path)
    write_manifest(
        out_path,
        "match",
        [candidates_path, corpus_path],
        {"max_dist": cap, "duplicates_removed": removed, "workers": workers},
        None,
        started,
    )
    return results


def run_stats(
    corpus_path: Path | str,
    out_path: Path | str,
    apps_path: Optional[Path | str] = None,
    top_k: int = 100,
    load_corpus_func: LoadCorpusFn = load_reviews,
) -> dict[str, Any]:
    """
    Write the characterisation report as JSON plus the rank tables as CSV
    (``<stem>.words.csv``, ``<stem>.bigrams.csv`` and, with app metadata,
    ``<stem>.categories.csv``).
    """
    started = time.perf_counter()
    require_inputs(corpus_path, apps_path)
    corpus = load_corpus_func(corpus_path, False, apps_path)
    report = build_report(corpus, top_k=top_k)
    FileHandler.write_json(report, out_path)

    for section in ("words", "bigrams"):
        FileHandler.write_csv(
            pd.DataFrame(
                report[section]["common"],
                columns=["token", "rank_a", "rank_b", "delta"],
            ).rename(columns={"rank_a": "rank_fake", "rank_b": "rank_regular"}),
            _sibling(out_path, f".{section}.csv"),
        )
    categories = report["apps"].get("categories")
    if categories is not None:
        deltas = {row["category"]: row["delta"] for row in categories["rank_deltas"]}
        frame = pd.DataFrame(categories["ranks"])
        frame["delta"] = frame["category"].map(deltas)
        FileHandler.write_csv(frame, _sibling(out_path, ".categories.csv"))

    write_manifest(
        out_path,
        "stats",
        [p for p in (corpus_path, apps_path) if p is not None],
        {"top_k": top_k},
        None,
        started,
    )
    return report


def run_featurize(
    corpus_path: Path | str,
    out_path: Path | str,
    store_lifetime_s: int = DEFAULT_STORE_LIFETIME_S,
    load_corpus_func: LoadCorpusFn = load_reviews,
    featurize_func: FeaturizeFn = featurize_corpus,
) -> FeatureTable:
    started = time.perf_counter()
    require_inputs(corpus_path)
    table = featurize_func(load_corpus_func(corpus_path, False, None), store_lifetime_s)
    write_features(table, out_path)
    write_manifest(
        out_path,
        "featurize",
        [corpus_path],
        {"store_lifetime_s": store_lifetime_s, "rows": len(table)},
        None,
        started,
    )
    return table


def _labelled(table: FeatureTable) -> tuple[np.ndarray, np.ndarray]:
    return table.matrix, table.targets()


def run_train(
    features_path: Path | str,
    out_path: Path | str,
    spec: ModelSpec,
    seed: int,
    workers: int = 1,
    read_features_func: ReadFeaturesFn = read_features,
) -> FittedClassifier:
    """Preprocess all labelled rows, train one model and save it as JSON."""
    started = time.perf_counter()
    require_inputs(features_path)
    X, y = _labelled(read_features_func(features_path))
    classifier = fit_classifier(spec.with_seed(seed), X, y, workers=workers)
    save_model(classifier, out_path)
    write_manifest(
        out_path,
        "train",
        [features_path],
        {"algorithm": spec.algorithm, "rows": len(y)},
        seed,
        started,
    )
    return classifier


def run_evaluate_model(
    model_path: Path | str,
    features_path: Path | str,
    out_path: Path | str,
    threshold: float = 0.5,
    read_features_func: ReadFeaturesFn = read_features,
) -> dict[str, Any]:
    """Score a saved model on a labelled feature file."""
    started = time.perf_counter()
    require_inputs(model_path, features_path)
    classifier = load_model(model_path)
    X, y = _labelled(read_features_func(features_path))
    scores = classifier.predict_score(X)
    confusion, metrics = evaluate(y, scores, threshold)
    try:
        auc: Optional[float] = auc_roc(y, scores)
    except InsufficientSamplesError:
        logger.warning("Only one class present, AUC is undefined.")
        auc = None
    report = {
        "algorithm": classifier.spec.algorithm,
        "threshold": threshold,
        "confusion": {
            "tp": confusion.tp,
            "fp": confusion.fp,
            "fn": confusion.fn,
            "tn": confusion.tn,
        },
        "metrics": {**metrics.to_dict(), "auc_roc": auc},
    }
    FileHandler.write_json(report, out_path)
    write_manifest(
        out_path,
        "evaluate",
        [model_path, features_path],
        {"threshold": threshold},
        None,
        started,
    )
    return report


def run_evaluate_cv(
    features_path: Path | str,
    out_path: Path | str,
    specs: Sequence[ModelSpec],
    cv: CVConfig,
    read_features_func: ReadFeaturesFn = read_features,
    cross_validate_func: CrossValidateFn = cross_validate,
) -> dict[str, Any]:
    """
    Compare algorithms by repeated stratified cross-validation on identical folds.

    A ``.csv`` output gets one row of mean metrics per algorithm, anything else the
    full JSON summary.
    """
    started = time.perf_counter()
    require_inputs(features_path)
    X, y = _labelled(read_features_func(features_path))
    results = {spec.algorithm: cross_validate_func(X, y, spec, cv) for spec in specs}
    summaries = {name: result.summary.to_dict() for name, result in results.items()}
    if Path(out_path).suffix == ".csv":
        FileHandler.write_csv(
            pd.DataFrame(
                [
                    {"algorithm": name, **result.summary.mean}
                    for name, result in results.items()
                ]
            ),
            out_path,
        )
    else:
        FileHandler.write_json(summaries, out_path)
    write_manifest(
        out_path,
        "evaluate",
        [features_path],
        _cv_parameters(cv, algorithms=[spec.algorithm for spec in specs]),
        cv.seed,
        started,
    )
    return summaries


def _cv_parameters(cv: CVConfig, **extra: Any) -> dict[str, Any]:
    return {
        "folds": cv.folds,
        "repeats": cv.repeats,
        "preprocess_scope": cv.preprocess_scope,
        "threshold": cv.threshold,
        **extra,
    }


def run_tune(
    features_path: Path | str,
    out_path: Path | str,
    method: Literal["grid", "rfecv"],
    cv: CVConfig,
    spec: Optional[ModelSpec] = None,
    grid: Optional[dict[str, list[Any]]] = None,
    scoring: str = "precision",
    read_features_func: ReadFeaturesFn = read_features,
) -> dict[str, Any]:
    """
    Grid search over random forest parameters, or RFECV for ``spec``.
    """
    started = time.perf_counter()
    require_inputs(features_path)
    X, y = _labelled(read_features_func(features_path))

    result: dict[str, Any]
    if method == "grid":
        search = grid_search(X, y, grid or DEFAULT_GRID, cv, scoring)
        result = {
            "method": "grid",
            "scoring": scoring,
            "best_params": params_row(search.best_params),
            "best_score": search.best_score,
            "table": search.table,
        }
    else:
        selection = rfecv(X, y, spec or ModelSpec.default("rf"), cv, scoring)
        result = {
            "method": "rfecv",
            "scoring": scoring,
            "selected": [FEATURE_COLUMNS[i] for i in selection.selected],
            "curve": [
                {
                    "n_features": step.n_features,
                    "score": step.score,
                    "features": [FEATURE_COLUMNS[i] for i in step.features],
                }
                for step in selection.curve
            ],
        }
    FileHandler.write_json(result, out_path)
    write_manifest(
        out_path,
        "tune",
        [features_path],
        _cv_parameters(cv, method=method, scoring=scoring),
        cv.seed,
        started,
    )
    return result


def run_importance(
    model_path: Path | str,
    out_path: Path | str,
    method: ImportanceMethod = "split_count",
) -> pd.DataFrame:
    """Write per-feature importances of a saved tree or forest, largest first."""
    started = time.perf_counter()
    require_inputs(model_path)
    classifier = load_model(model_path)
    importance = feature_importance(classifier.model, method)
    if importance.degenerate:
        logger.warning("The model has no splits; all importances are 0.")
    frame = pd.DataFrame(
        {
            "feature": [FEATURE_COLUMNS[i] for i in classifier.features],
            "importance": importance.values,
        }
    ).sort_values("importance", ascending=False, kind="stable")
    FileHandler.write_csv(frame, out_path)
    write_manifest(
        out_path,
        "importance",
        [model_path],
        {"method": method, "degenerate": importance.degenerate},
        None,
        started,
    )
    return frame


def run_sweep_stage(
    features_path: Path | str,
    out_path: Path | str,
    specs: Sequence[ModelSpec],
    cv: CVConfig,
    seed: int,
    min_skew: float = 1.0,
    n_fake: Optional[int] = None,
    workers: int = 1,
    read_features_func: ReadFeaturesFn = read_features,
) -> list[SweepRow]:
    """
    Run the imbalance sweep over a labelled feature file.

    Fake rows form the fixed fake set (``n_fake`` of them, drawn with ``seed``, if
    given); regular rows form the pool.
    """
    started = time.perf_counter()
    require_inputs(features_path)
    table = read_features_func(features_path)
    fakes = table.subset(Label.FAKE).matrix
    pool = table.subset(Label.REGULAR).matrix
    if n_fake is not None:
        if n_fake > len(fakes):
            raise InsufficientSamplesError(
                f"Requested {n_fake} fakes, the file holds {len(fakes)}."
            )
        fakes = fakes[np.sort(derive_rng(seed, 2).permutation(len(fakes))[:n_fake])]

    rows = run_sweep(
        fakes, pool, list(specs), cv, seed, skew_grid(min_skew), workers=workers
    )
    FileHandler.write_csv(sweep_frame(rows), out_path)
    write_manifest(
        out_path,
        "sweep",
        [features_path],
        _cv_parameters(
            cv,
            algorithms=[spec.algorithm for spec in specs],
            min_skew=min_skew,
            n_fake=len(fakes),
        ),
        seed,
        started,
    )
    return rows


def run_syngen(
    out_path: Path | str,
    seed: int,
    n_fake_reviewers: int = 100,
    n_regular_reviewers: int = 1000,
    n_apps: int = 500,
    apps_out_path: Optional[Path | str] = None,
    fake: PopulationParams = FAKE_DEFAULTS,
    regular: PopulationParams = REGULAR_DEFAULTS,
    workers: int = 1,
) -> ReviewCorpus:
    """
    Generate a corpus, write it with a ``<stem>.params.json`` sidecar and, optionally,
    its app metadata.
    """
    started = time.perf_counter()
    corpus = generate(
        fake, regular, n_fake_reviewers, n_regular_reviewers, n_apps, seed, workers
    )
    write_reviews(corpus.reviews, out_path)
    counts = {
        "fake_reviewers": n_fake_reviewers,
        "regular_reviewers": n_regular_reviewers,
        "apps": n_apps,
        "reviews": len(corpus),
    }
    write_params_sidecar(
        _sibling(out_path, ".params.json"), fake, regular, counts, seed
    )
    if apps_out_path is not None:
        write_app_metadata(corpus, apps_out_path)
    write_manifest(out_path, "syngen", [], counts, seed, started)
    return corpus


def list_invalid_records(db_path: Path | str) -> None:
    """
    Report the records a non-strict ingest rejected, in a readable format.
    """
    require_inputs(db_path)
    records = list_rejected_records(db_path)
    print(f"{len(records)} invalid records found:")
    for record in records:
        print(f"[{record.source}:{record.line_number}] {record.raw[:80]}")
        for field, error in record.validation_errors.items():
            print(f"  - {field}: {error}")
