"""
Exception hierarchy.

Every failure the package raises deliberately derives from ``FakeReviewLabError`` so
the CLI can report it as a structured error and exit with status 1. The exception is
``MissingInputError``, a ``FileNotFoundError`` reported with exit status 2.
"""


class FakeReviewLabError(Exception):
    """Base class for all domain errors."""

    pass


class CorpusValidationError(FakeReviewLabError):
    """A record in a corpus file violates the review schema (strict mode)."""

    def __init__(self, line_number: int, errors: dict[str, str]) -> None:
        self.line_number = line_number
        self.errors = errors
        details = "; ".join(f"{field}: {msg}" for field, msg in errors.items())
        super().__init__(f"Invalid record on line {line_number}: {details}")


class DuplicateReviewError(FakeReviewLabError):
    """The same review_id occurs more than once in a corpus."""

    pass


class ProfileMismatchError(FakeReviewLabError):
    """A reviewer or app profile does not belong to the review being featurised."""

    pass


class DegenerateSampleError(FakeReviewLabError):
    """A statistical test cannot be computed on the given samples."""

    pass


class UndefinedCorrelationError(DegenerateSampleError):
    """A rank correlation over a constant sequence."""

    pass


class InsufficientSamplesError(FakeReviewLabError):
    """Too few samples (or too few per class) for the requested operation."""

    pass


class UnsupportedModelError(FakeReviewLabError):
    """The operation needs something the model does not provide."""

    pass


class DimensionMismatchError(FakeReviewLabError):
    """Feature dimension differs from the dimension the model was trained on."""

    pass


class InsufficientPoolError(FakeReviewLabError):
    """The regular-review pool is too small for the requested skews."""

    def __init__(self, required: int, available: int) -> None:
        self.required = required
        self.available = available
        super().__init__(
            f"Regular pool holds {available} samples but {required} are required."
        )


class ParameterError(FakeReviewLabError):
    """Invalid generator or model parameters."""

    pass


class ModelFormatError(FakeReviewLabError):
    """A serialised model file has an unknown format or version."""

    pass


class MissingInputError(FileNotFoundError):
    """
    An input file named on the command line does not exist.

    Other ``OSError`` failures, such as a missing output directory, are not this.
    """

    pass
