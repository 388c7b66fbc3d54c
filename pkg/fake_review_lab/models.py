"""
SQLAlchemy ORM models for a stored review corpus.

``frl ingest`` writes validated reviews, optional app metadata and the records it had to
reject into a SQLite file. Review ids are used as primary keys so a store can never hold
the same review twice.

Note on ORM validation
----------------------
Validation is done by the pydantic schema layer before anything reaches these classes.
Type hints e.g. ``Mapped[int]`` are not enforced at runtime by SQLAlchemy and SQLite is
permissive about both datatypes and lengths.
"""

from typing import Any, Optional

from sqlalchemy import JSON, ForeignKey, Index
from sqlalchemy.orm import (
    DeclarativeBase,
    Mapped,
    mapped_column,
    object_mapper,
    relationship,
)


class ModelDumperMixin:
    """Mixin to dump column data to a dictionary."""

    def dump_column_data(self, exclude: Optional[set[str]] = None) -> dict[str, Any]:
        """
        Dump column fields and values to a dict.

        Parameters
        ----------
        exclude : Optional[set[str]]
            A set of column names to exclude from the output. If None, no columns are
            excluded.

        Returns
        -------
        dict[str, Any]
            A dictionary where keys are column names and values are the corresponding
            values from the ORM mapped class instance.
        """
        exclude = exclude or set()
        return {
            column.key: getattr(self, column.key)
            for column in object_mapper(self).columns
            if column.key not in exclude
        }


class Base(DeclarativeBase, ModelDumperMixin):
    """
    Subclass SQLAlchemy ``DeclarativeBase`` base class.

    All ORM Mapped classes should inherit from ``Base``. Tables can then be created
    with ``Base.metadata.create_all``.
    """


class StoredApp(Base):
    """App metadata row. Apps without metadata are still created, with nulls."""

    __tablename__ = "apps"

    app_id: Mapped[str] = mapped_column(primary_key=True)
    category: Mapped[Optional[str]]
    price_cents: Mapped[Optional[int]]
    has_metadata: Mapped[bool] = mapped_column(default=False)

    reviews: Mapped[list["StoredReview"]] = relationship(back_populates="app")

    def __repr__(self) -> str:
        return f"StoredApp(app_id={self.app_id!r}, category={self.category!r})"


class StoredReview(Base):
    """One validated review."""

    __tablename__ = "reviews"
    __table_args__ = (Index("ix_reviews_reviewer_id", "reviewer_id"),)

    review_id: Mapped[str] = mapped_column(primary_key=True)
    app_id: Mapped[str] = mapped_column(ForeignKey("apps.app_id"), nullable=False)
    reviewer_id: Mapped[str] = mapped_column(nullable=False)
    title: Mapped[str]
    body: Mapped[str]
    rating: Mapped[int]
    timestamp: Mapped[int]
    helpful_votes: Mapped[int]
    unhelpful_votes: Mapped[int]
    label: Mapped[Optional[str]]

    app: Mapped["StoredApp"] = relationship(back_populates="reviews")

    def __repr__(self) -> str:
        return (
            f"StoredReview(review_id={self.review_id!r}, app_id={self.app_id!r}, "
            f"rating={self.rating!r})"
        )


class RejectedRecord(Base):
    """
    A corpus line that failed schema validation during a non-strict ingest.

    ``validation_errors`` is stored as JSON: ``{"field": "message"}``.
    """

    __tablename__ = "rejected_records"

    id: Mapped[int] = mapped_column(primary_key=True, autoincrement=True)
    source: Mapped[str]
    line_number: Mapped[int]
    raw: Mapped[str]
    validation_errors: Mapped[dict[str, str]] = mapped_column(JSON, nullable=False)

    def __repr__(self) -> str:
        return (
            f"RejectedRecord(source={self.source!r}, line_number={self.line_number!r})"
        )
