"""Application CLI."""

import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from typing import TYPE_CHECKING, Optional, Sequence

from fake_review_lab import __version__
from fake_review_lab.config import UserConfig, fetch_user_config
from fake_review_lab.configure_logging import setup_logging
from fake_review_lab.errors import FakeReviewLabError, MissingInputError
from fake_review_lab.learner.forest import ForestParams
from fake_review_lab.learner.metrics import METRIC_NAMES
from fake_review_lab.learner.model_spec import ALGORITHMS, ModelSpec
from fake_review_lab.learner.tree import MaxFeatures, TreeParams
from fake_review_lab.learner.validation import CVConfig
from fake_review_lab.matcher import DEFAULT_MAX_DISTANCE
from fake_review_lab.pipeline import (
    list_invalid_records,
    run_evaluate_cv,
    run_evaluate_model,
    run_featurize,
    run_importance,
    run_ingest,
    run_match,
    run_stats,
    run_sweep_stage,
    run_syngen,
    run_train,
    run_tune,
)
from fake_review_lab.utils import new_root_seed

logger = logging.getLogger(__name__)

EXIT_DOMAIN_ERROR = 1
EXIT_MISSING_INPUT = 2

CV_DEFAULTED_FIELDS = ("folds", "repeats", "preprocess_scope")
TRAINING_ONLY_FLAGS = {
    "folds": "--folds",
    "repeats": "--repeats",
    "preprocess_scope": "--preprocess-scope",
    "n_estimators": "--n-estimators",
    "max_depth": "--max-depth",
    "max_features": "--max-features",
    "min_samples_split": "--min-samples-split",
}

# Type hint for subparsers action, used for type checking.
if TYPE_CHECKING:
    from argparse import _SubParsersAction

    SubParsersAction = _SubParsersAction[argparse.ArgumentParser]
else:
    SubParsersAction = object


def parse_algorithms(value: str) -> list[str]:
    algorithms = [item.strip() for item in value.split(",") if item.strip()]
    unknown = [item for item in algorithms if item not in ALGORITHMS]
    if not algorithms or unknown:
        raise argparse.ArgumentTypeError(
            f"Not a comma separated list of {'/'.join(ALGORITHMS)}: '{value}'."
        )
    return algorithms


def parse_max_features(value: str) -> MaxFeatures:
    if value in ("all", "sqrt"):
        return value  # type: ignore[return-value]
    try:
        count = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"max-features must be 'all', 'sqrt' or an integer, got '{value}'."
        )
    if count < 1:
        raise argparse.ArgumentTypeError(f"max-features must be >= 1, got {count}.")
    return count


def parse_skew(value: str) -> float:
    try:
        skew = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"Not a number: '{value}'.")
    if not 0 < skew < 100:
        raise argparse.ArgumentTypeError(f"Skew must be in (0, 100), got {skew}.")
    return skew


def setup_run_parent(user_config: UserConfig) -> argparse.ArgumentParser:
    """Flags shared by every subcommand that draws randomness or runs in parallel."""
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument(
        "--seed",
        type=int,
        default=None,
        help="Root seed for all randomness. Generated and recorded when omitted.",
    )
    parent.add_argument(
        "--workers",
        type=int,
        default=user_config.workers,
        help="Worker processes for parallel stages (default: FRL_WORKERS or the CPU "
        "count). Outputs do not depend on it.",
    )
    return parent


def setup_cv_parent() -> argparse.ArgumentParser:
    """
    Cross-validation overrides.

    ``--folds``, ``--repeats`` and ``--preprocess-scope`` parse to None when absent so
    that ``evaluate --model`` can tell they were given; ``parse_args`` fills them in.
    """
    defaults = CVConfig()
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument(
        "--folds", type=int, default=None, help=f"Default {defaults.folds}."
    )
    parent.add_argument(
        "--repeats", type=int, default=None, help=f"Default {defaults.repeats}."
    )
    parent.add_argument(
        "--preprocess-scope",
        choices=["fold", "global"],
        default=None,
        help="'fold' fits the scaler on each training part (default); 'global' "
        "preprocesses the whole dataset before splitting.",
    )
    parent.add_argument(
        "--threshold",
        type=float,
        default=defaults.threshold,
        help="Score at or above which a sample is classified fake.",
    )
    return parent


def setup_model_parent() -> argparse.ArgumentParser:
    """Tree and forest parameters for the training and evaluation subcommands."""
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--n-estimators", type=int, default=None)
    parent.add_argument("--max-depth", type=int, default=None)
    parent.add_argument("--max-features", type=parse_max_features, default=None)
    parent.add_argument("--min-samples-split", type=int, default=None)
    return parent


def setup_ingest_subparser(subparsers: "SubParsersAction") -> None:
    ingest = subparsers.add_parser(
        "ingest", help="Validate a corpus file and store it in a SQLite database."
    )
    ingest.add_argument("--in", dest="input", required=True, help="Corpus .jsonl.")
    ingest.add_argument("--db", required=True, help="Output store (replaced).")
    ingest.add_argument("--apps", default=None, help="Optional app-metadata .jsonl.")
    ingest.add_argument(
        "--strict",
        action="store_true",
        help="Reject the whole file on the first invalid record.",
    )


def setup_match_subparser(
    subparsers: "SubParsersAction", run_parent: argparse.ArgumentParser
) -> None:
    match = subparsers.add_parser(
        "match",
        parents=[run_parent],
        help="Locate candidate reviews in a corpus by exact or fuzzy text match.",
    )
    match.add_argument("--candidates", required=True, help="Candidate .jsonl.")
    match.add_argument("--corpus", required=True, help="Corpus .jsonl or .db.")
    match.add_argument("--out", required=True, help="Output CSV.")
    match.add_argument(
        "--max-dist",
        type=int,
        default=DEFAULT_MAX_DISTANCE,
        help="Largest edit distance accepted as a fuzzy match.",
    )


def setup_stats_subparser(subparsers: "SubParsersAction") -> None:
    stats = subparsers.add_parser(
        "stats", help="Compare fake and regular reviews of a labelled corpus."
    )
    stats.add_argument("--in", dest="input", required=True, help="Corpus .jsonl/.db.")
    stats.add_argument("--out", required=True, help="Output JSON report.")
    stats.add_argument("--apps", default=None, help="Optional app-metadata .jsonl.")
    stats.add_argument(
        "--top-k", type=int, default=100, help="Words and bigrams ranked per class."
    )


def setup_featurize_subparser(
    subparsers: "SubParsersAction", user_config: UserConfig
) -> None:
    featurize = subparsers.add_parser(
        "featurize", help="Write the 15 feature columns and label of every review."
    )
    featurize.add_argument("--in", dest="input", required=True, help="Corpus file.")
    featurize.add_argument("--out", required=True, help="Output CSV.")
    featurize.add_argument(
        "--store-lifetime-s",
        type=int,
        default=user_config.store_lifetime_s,
        help="Review frequency used for reviewers with a single review.",
    )


def setup_train_subparser(
    subparsers: "SubParsersAction",
    run_parent: argparse.ArgumentParser,
    model_parent: argparse.ArgumentParser,
) -> None:
    train = subparsers.add_parser(
        "train",
        parents=[run_parent, model_parent],
        help="Train one classifier on a labelled feature CSV.",
    )
    train.add_argument("--features", required=True, help="Feature CSV.")
    train.add_argument("--out", required=True, help="Output model JSON.")
    train.add_argument("--algorithm", choices=ALGORITHMS, default="rf")


def setup_evaluate_subparser(
    subparsers: "SubParsersAction",
    run_parent: argparse.ArgumentParser,
    cv_parent: argparse.ArgumentParser,
    model_parent: argparse.ArgumentParser,
) -> None:
    evaluate = subparsers.add_parser(
        "evaluate",
        parents=[run_parent, cv_parent, model_parent],
        help="Score a saved model, or compare algorithms by cross-validation.",
    )
    evaluate.add_argument("--features", required=True, help="Feature CSV.")
    evaluate.add_argument(
        "--out", required=True, help="Output JSON (or CSV of mean metrics for CV)."
    )
    group = evaluate.add_mutually_exclusive_group(required=True)
    group.add_argument("--model", help="Model JSON written by 'train'.")
    group.add_argument(
        "--algorithms",
        type=parse_algorithms,
        help="Comma separated algorithms to cross-validate, e.g. nb,dt,rf.",
    )


def setup_tune_subparser(
    subparsers: "SubParsersAction",
    run_parent: argparse.ArgumentParser,
    cv_parent: argparse.ArgumentParser,
    model_parent: argparse.ArgumentParser,
) -> None:
    tune = subparsers.add_parser(
        "tune",
        parents=[run_parent, cv_parent, model_parent],
        help="Grid search random forest parameters or select features by RFECV.",
    )
    tune.add_argument("--features", required=True, help="Feature CSV.")
    tune.add_argument("--out", required=True, help="Output JSON.")
    tune.add_argument("--method", choices=["grid", "rfecv"], required=True)
    tune.add_argument(
        "--algorithm",
        choices=["dt", "rf"],
        default="rf",
        help="Estimator for RFECV.",
    )
    tune.add_argument("--scoring", choices=METRIC_NAMES, default="precision")


def setup_importance_subparser(subparsers: "SubParsersAction") -> None:
    importance = subparsers.add_parser(
        "importance", help="Per-feature importance of a saved tree or forest."
    )
    importance.add_argument("--model", required=True, help="Model JSON.")
    importance.add_argument("--out", required=True, help="Output CSV.")
    importance.add_argument(
        "--method", choices=["split_count", "impurity"], default="split_count"
    )


def setup_sweep_subparser(
    subparsers: "SubParsersAction",
    run_parent: argparse.ArgumentParser,
    cv_parent: argparse.ArgumentParser,
    model_parent: argparse.ArgumentParser,
) -> None:
    sweep = subparsers.add_parser(
        "sweep",
        parents=[run_parent, cv_parent, model_parent],
        help="Cross-validate algorithms from 90%% down to 0.1%% fake samples.",
    )
    sweep.add_argument("--features", required=True, help="Labelled feature CSV.")
    sweep.add_argument("--out", required=True, help="Output CSV.")
    sweep.add_argument(
        "--algorithms", type=parse_algorithms, default=list(ALGORITHMS)
    )
    sweep.add_argument(
        "--min-skew",
        type=parse_skew,
        default=0.1,
        help="Smallest fake percentage swept, e.g. 1 for desk-scale runs.",
    )
    sweep.add_argument(
        "--n-fake",
        type=int,
        default=None,
        help="Use a seeded subset of this many fake rows.",
    )


def setup_syngen_subparser(
    subparsers: "SubParsersAction", run_parent: argparse.ArgumentParser
) -> None:
    syngen = subparsers.add_parser(
        "syngen",
        parents=[run_parent],
        help="Generate a labelled synthetic corpus.",
    )
    syngen.add_argument("--out", required=True, help="Output corpus .jsonl.")
    syngen.add_argument("--apps-out", default=None, help="Optional app metadata.")
    syngen.add_argument("--fake-reviewers", type=int, default=100)
    syngen.add_argument("--regular-reviewers", type=int, default=1000)
    syngen.add_argument("--apps", type=int, default=500)


def setup_invalids_subparser(subparsers: "SubParsersAction") -> None:
    """Setup the 'list-invalids' subparser for the CLI."""
    invalids = subparsers.add_parser(
        "list-invalids", help="Report records rejected by a non-strict ingest."
    )
    invalids.add_argument("--db", required=True, help="Store written by 'ingest'.")


def setup_parser() -> argparse.ArgumentParser:
    """Setup the main argument parser for the CLI."""
    parser = argparse.ArgumentParser(
        prog="frl",
        description="Characterise fake app reviews and evaluate detectors for them.",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    return parser


def setup_parser_and_subparsers(
    user_config: Optional[UserConfig] = None,
) -> argparse.ArgumentParser:
    """Setup the main argument parser and its subparsers."""
    if user_config is None:
        user_config = fetch_user_config()
    parser = setup_parser()
    run_parent = setup_run_parent(user_config)
    cv_parent = setup_cv_parent()
    model_parent = setup_model_parent()

    subparsers = parser.add_subparsers(dest="command", required=True)
    setup_ingest_subparser(subparsers)
    setup_match_subparser(subparsers, run_parent)
    setup_stats_subparser(subparsers)
    setup_featurize_subparser(subparsers, user_config)
    setup_train_subparser(subparsers, run_parent, model_parent)
    setup_evaluate_subparser(subparsers, run_parent, cv_parent, model_parent)
    setup_tune_subparser(subparsers, run_parent, cv_parent, model_parent)
    setup_importance_subparser(subparsers)
    setup_sweep_subparser(subparsers, run_parent, cv_parent, model_parent)
    setup_syngen_subparser(subparsers, run_parent)
    setup_invalids_subparser(subparsers)

    return parser


def parse_args(
    argv: Optional[Sequence[str]] = None, user_config: Optional[UserConfig] = None
) -> argparse.Namespace:
    """
    Parse command line arguments.

    ``evaluate --model`` scores a model that is already trained, so cross-validation
    and model flags are rejected there rather than silently ignored.
    """
    parser = setup_parser_and_subparsers(user_config)
    args = parser.parse_args(argv)

    if args.command == "evaluate" and args.model is not None:
        given = [
            flag
            for name, flag in TRAINING_ONLY_FLAGS.items()
            if getattr(args, name) is not None
        ]
        if given:
            parser.error(f"{', '.join(given)} cannot be combined with --model.")

    defaults = CVConfig()
    for name in CV_DEFAULTED_FIELDS:
        if getattr(args, name, "absent") is None:
            setattr(args, name, getattr(defaults, name))
    return args


def resolve_seed(args: argparse.Namespace) -> int:
    """Return ``--seed``, or a generated seed that is logged for repeat runs."""
    if args.seed is not None:
        return int(args.seed)
    seed = new_root_seed()
    logger.info(f"No --seed given, using generated seed {seed}.")
    return seed


def build_model_spec(algorithm: str, args: argparse.Namespace) -> ModelSpec:
    """Default parameters for ``algorithm`` with any tree/forest flags applied."""
    spec = ModelSpec.default(algorithm)
    overrides = {
        name: getattr(args, name, None)
        for name in ("max_depth", "max_features", "min_samples_split")
        if getattr(args, name, None) is not None
    }
    if isinstance(spec.params, TreeParams):
        return ModelSpec("dt", replace(spec.params, **overrides))
    if isinstance(spec.params, ForestParams):
        forest = replace(spec.params, tree=replace(spec.params.tree, **overrides))
        if getattr(args, "n_estimators", None) is not None:
            forest = replace(forest, n_estimators=args.n_estimators)
        return ModelSpec("rf", forest)
    return spec


def build_cv_config(args: argparse.Namespace, seed: int) -> CVConfig:
    return CVConfig(
        folds=args.folds,
        repeats=args.repeats,
        seed=seed,
        preprocess_scope=args.preprocess_scope,
        threshold=args.threshold,
        workers=args.workers,
    )


def run_command(args: argparse.Namespace) -> None:
    """Dispatch parsed arguments to the pipeline stage they name."""
    if args.command == "ingest":
        run_ingest(args.input, args.db, args.apps, args.strict)

    elif args.command == "match":
        run_match(args.candidates, args.corpus, args.out, args.max_dist, args.workers)

    elif args.command == "stats":
        run_stats(args.input, args.out, args.apps, args.top_k)

    elif args.command == "featurize":
        run_featurize(args.input, args.out, args.store_lifetime_s)

    elif args.command == "train":
        seed = resolve_seed(args)
        spec = build_model_spec(args.algorithm, args)
        run_train(args.features, args.out, spec, seed, args.workers)

    elif args.command == "evaluate":
        if args.model is not None:
            run_evaluate_model(args.model, args.features, args.out, args.threshold)
        else:
            seed = resolve_seed(args)
            specs = [build_model_spec(name, args) for name in args.algorithms]
            run_evaluate_cv(args.features, args.out, specs, build_cv_config(args, seed))

    elif args.command == "tune":
        seed = resolve_seed(args)
        run_tune(
            args.features,
            args.out,
            args.method,
            build_cv_config(args, seed),
            spec=build_model_spec(args.algorithm, args),
            scoring=args.scoring,
        )

    elif args.command == "importance":
        run_importance(args.model, args.out, args.method)

    elif args.command == "sweep":
        seed = resolve_seed(args)
        # Cells run in parallel, so folds inside a cell do not.
        cv = replace(build_cv_config(args, seed), workers=1)
        run_sweep_stage(
            args.features,
            args.out,
            [build_model_spec(name, args) for name in args.algorithms],
            cv,
            seed,
            min_skew=args.min_skew,
            n_fake=args.n_fake,
            workers=args.workers,
        )

    elif args.command == "syngen":
        seed = resolve_seed(args)
        run_syngen(
            args.out,
            seed,
            n_fake_reviewers=args.fake_reviewers,
            n_regular_reviewers=args.regular_reviewers,
            n_apps=args.apps,
            apps_out_path=args.apps_out,
            workers=args.workers,
        )

    elif args.command == "list-invalids":
        list_invalid_records(args.db)

    else:
        logger.error("Unknown command. Use --help for usage.")
        sys.exit(EXIT_DOMAIN_ERROR)


def main(
    user_config: Optional[UserConfig] = None, argv: Optional[Sequence[str]] = None
) -> None:
    """
    Main function that runs with the entry point.

    Parameters
    ----------
    user_config, default = None
        A UserConfig object.
    argv, default = None
        Arguments to parse instead of ``sys.argv``.

    Exit status is 0 on success and 2 when an input file is missing. Domain errors
    and other ``OSError`` failures, such as an output directory that does not exist,
    exit with 1 and write ``{"error": ..., "message": ...}`` to stderr.
    """
    if user_config is None:
        user_config = fetch_user_config()
    setup_logging(user_config)

    args = parse_args(argv, user_config)
    # Scratch space for arrays joblib memory-maps to its workers.
    user_config.tmp_dir.mkdir(parents=True, exist_ok=True)
    os.environ["JOBLIB_TEMP_FOLDER"] = str(user_config.tmp_dir)

    try:
        run_command(args)
    except MissingInputError as err:
        logger.error(str(err))
        print(str(err), file=sys.stderr)
        sys.exit(EXIT_MISSING_INPUT)
    except (FakeReviewLabError, OSError) as err:
        logger.error(f"{type(err).__name__}: {err}")
        print(
            json.dumps({"error": type(err).__name__, "message": str(err)}),
            file=sys.stderr,
        )
        sys.exit(EXIT_DOMAIN_ERROR)
