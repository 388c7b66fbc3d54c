"""
Pydantic schema for verifying corpus records.

Each line of a corpus, app-metadata or candidate file is validated against one of the
schemas below before it becomes a domain object. The schema is the single place where
the record invariants are written down: ratings between one and five stars, non-negative
timestamps and vote counts, and a label that is either absent, ``"fake"`` or
``"regular"``.

Note
----
All models pass two keyword arguments:
    - ``strict=True``: Enables strict enforcement of types for all fields. ``"5"`` is
      not a rating and ``true`` is not a vote count.
    - ``extra=forbid``: Enables unexpected, undefined fields to error. Pydantic schema
      accept unexpected fields by default.
"""

from collections.abc import Iterator
from dataclasses import dataclass
from pathlib import Path
from typing import Generic, Literal, Optional, TypeVar

from pydantic import BaseModel, Field, ValidationError


class ReviewSchema(BaseModel, extra="forbid", strict=True):
    """
    Validate one review record of a newline-delimited corpus file.
    """

    review_id: str = Field(min_length=1)
    app_id: str = Field(min_length=1)
    reviewer_id: str = Field(min_length=1)
    title: str
    body: str
    rating: int = Field(ge=1, le=5)
    timestamp: int = Field(ge=0)  # Seconds since the Unix epoch, UTC.
    helpful_votes: int = Field(ge=0)
    unhelpful_votes: int = Field(ge=0)
    label: Optional[Literal["fake", "regular"]] = None


class AppMetaSchema(BaseModel, extra="forbid", strict=True):
    """
    Validate one record of the optional app-metadata file.
    """

    app_id: str = Field(min_length=1)
    category: Optional[str] = None
    price_cents: Optional[int] = Field(default=None, ge=0)


class CandidateSchema(BaseModel, extra="forbid", strict=True):
    """
    Validate one candidate text recovered from a screenshot or a provider listing.
    """

    id: str = Field(min_length=1)
    title: str
    body: str


def flatten_validation_errors(err: ValidationError) -> dict[str, str]:
    """
    Flatten a pydantic ``ValidationError`` into ``{"field": "message"}``.

    Parameters
    ----------
    err: ValidationError
        The error raised by a schema.

    Returns
    -------
    dict[str, str]
        Field locations joined with ``.`` mapped to their messages.
    """
    validation_errors = {}
    for detail in err.errors():
        location = ".".join(str(part) for part in detail["loc"]) or "__root__"
        validation_errors[location] = detail["msg"]
    return validation_errors


SchemaT = TypeVar("SchemaT", bound=BaseModel)


@dataclass(frozen=True)
class ValidatedLine(Generic[SchemaT]):
    line_number: int
    raw: str
    record: Optional[SchemaT]
    validation_errors: dict[str, str]


def validate_jsonl(
    path: Path | str, schema: type[SchemaT]
) -> Iterator[ValidatedLine[SchemaT]]:
    """
    Validate a newline-delimited JSON file line by line against ``schema``.

    Lines are read as bytes and decoded one at a time, so a line that is not valid
    UTF-8 is reported like any other invalid record instead of aborting the file.
    Blank lines are ignored and lines are numbered from 1.

    Yields
    ------
    ValidatedLine
        ``record`` is set when the line is valid, otherwise ``validation_errors`` holds
        the flattened errors.
    """
    with open(path, "rb") as file_handle:
        for line_number, raw_line in enumerate(file_handle, start=1):
            stripped = raw_line.strip()
            if not stripped:
                continue
            try:
                text = stripped.decode("utf-8")
            except UnicodeDecodeError as err:
                yield ValidatedLine(
                    line_number,
                    stripped.decode("utf-8", errors="replace"),
                    None,
                    {"__root__": f"Invalid UTF-8: {err.reason} at byte {err.start}"},
                )
                continue
            try:
                record = schema.model_validate_json(text)
            except ValidationError as err:
                yield ValidatedLine(
                    line_number, text, None, flatten_validation_errors(err)
                )
                continue
            yield ValidatedLine(line_number, text, record, {})
