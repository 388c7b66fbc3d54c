"""
Logic for interacting with the corpus store.
"""

import logging
import sqlite3
from collections.abc import Iterable
from pathlib import Path
from typing import Any, Union

from sqlalchemy import Engine, create_engine, event, select
from sqlalchemy.orm import Session, sessionmaker

from fake_review_lab.corpus import AppMeta, Label, RawRecord, Review, ReviewCorpus
from fake_review_lab.models import Base, RejectedRecord, StoredApp, StoredReview

logger = logging.getLogger(__name__)


def safe_create_sqlite_engine(
    sqlite_database: Union[str, Path], echo: bool = False
) -> Engine:
    """
    Create a SQLite engine with foreign key enforcement enabled for all connections.

    Foreign key constraints are not enforced by default in SQLite. They must be
    enabled for every new database connection using the ``PRAGMA foreign_keys=ON``
    statement, as PRAGMA settings do not persist in the database file. For more details,
    see: https://docs.sqlalchemy.org/en/20/dialects/sqlite.html#foreign-key-support

    Parameters
    ----------
    sqlite_database : Union[str, Path]
        The filename of the SQLite database file, or ':memory:' for an in-memory
        database.
    echo : bool, optional
        If ``True``, SQLAlchemy will log all SQL statements (default is ``False``).

    Returns
    -------
    Engine
        A SQLAlchemy ``Engine`` instance that will enforce foreign key constraints
        on all connections.
    """

    def set_sqlite_pragma(
        dbapi_connection: sqlite3.Connection, connection_record: Any
    ) -> None:
        cursor = dbapi_connection.cursor()
        cursor.execute("PRAGMA foreign_keys=ON")
        cursor.close()

    db_path = "sqlite:///" + str(sqlite_database)
    engine = create_engine(db_path, echo=echo)
    event.listen(engine, "connect", set_sqlite_pragma)
    return engine


def get_session(database_path: str | Path) -> Session:
    """
    Establish a connection to the database and return a session.

    Parameters
    ----------
    database_path : str | Path
    """
    engine = safe_create_sqlite_engine(database_path)
    SessionFactory = sessionmaker(bind=engine)
    return SessionFactory()


def create_database(database_path: str | Path) -> None:
    """Create the store schema."""
    engine = safe_create_sqlite_engine(database_path)
    Base.metadata.create_all(engine)


def write_corpus(
    session: Session,
    corpus: ReviewCorpus,
    rejected: Iterable[RawRecord] = (),
    source: str = "",
) -> None:
    """
    Add a corpus, its app metadata and any rejected records to a session.

    The caller commits. Apps referenced by reviews but absent from the metadata are
    created with null metadata so the foreign key holds.

    Parameters
    ----------
    session: Session
        A SQL alchemy session connected to a store with the schema created.
    corpus: ReviewCorpus
        A validated corpus.
    rejected: Iterable[RawRecord]
        Records that failed validation.
    source: str
        The file the records came from.
    """
    app_ids = sorted(set(corpus.app_index) | set(corpus.apps))
    for app_id in app_ids:
        meta = corpus.apps.get(app_id)
        session.add(
            StoredApp(
                app_id=app_id,
                category=meta.category if meta else None,
                price_cents=meta.price_cents if meta else None,
                has_metadata=meta is not None,
            )
        )
    session.flush()

    session.add_all(
        StoredReview(**review.to_record()) for review in corpus.reviews
    )
    rejected_count = 0
    for record in rejected:
        session.add(
            RejectedRecord(
                source=source,
                line_number=record.line_number,
                raw=record.raw,
                validation_errors=record.validation_errors,
            )
        )
        rejected_count += 1
    logger.info(
        f"Stored {len(corpus)} reviews, {len(app_ids)} apps and {rejected_count} "
        "rejected records."
    )


def read_corpus(database_path: str | Path) -> ReviewCorpus:
    """
    Read a store written by ``write_corpus`` back into a ``ReviewCorpus``.
    """
    with get_session(database_path) as session:
        reviews = []
        for row in session.execute(select(StoredReview)).scalars():
            columns = row.dump_column_data(exclude={"label"})
            label = Label(row.label) if row.label is not None else None
            reviews.append(Review(**columns, label=label))
        apps = {
            row.app_id: AppMeta(**row.dump_column_data(exclude={"has_metadata"}))
            for row in session.execute(
                select(StoredApp).where(StoredApp.has_metadata.is_(True))
            ).scalars()
        }
        skipped = len(session.execute(select(RejectedRecord.id)).all())
    return ReviewCorpus.from_reviews(reviews, apps, skipped_count=skipped)


def list_rejected_records(database_path: str | Path) -> list[RejectedRecord]:
    """Return the rejected records of a store ordered by source and line."""
    with get_session(database_path) as session:
        stmt = select(RejectedRecord).order_by(
            RejectedRecord.source, RejectedRecord.line_number
        )
        records = list(session.execute(stmt).scalars())
        session.expunge_all()
    return records
