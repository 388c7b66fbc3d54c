import logging
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Optional

from rich.logging import RichHandler

from fake_review_lab.config import UserConfig, fetch_user_config

FILE_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
MAX_LOG_BYTES = 2_000_000


def console_handler() -> RichHandler:
    """Stage progress at INFO, rendered by rich."""
    handler = RichHandler(rich_tracebacks=True, show_path=False)
    handler.setLevel(logging.INFO)
    handler.setFormatter(logging.Formatter("%(message)s", datefmt="[%X]"))
    return handler


def file_handler(log_file: Path) -> RotatingFileHandler:
    """Everything down to per-fold DEBUG detail, one rotated file."""
    log_file.parent.mkdir(parents=True, exist_ok=True)
    handler = RotatingFileHandler(log_file, maxBytes=MAX_LOG_BYTES, backupCount=1)
    handler.setLevel(logging.DEBUG)
    handler.setFormatter(logging.Formatter(FILE_FORMAT))
    return handler


def setup_logging(user_config: Optional[UserConfig] = None) -> None:
    """
    Attach the console and file handlers to the root logger, once per process.

    numpy and scipy report numerical trouble (empty slices, overflow in a variance)
    through ``warnings``; those are routed into the log as well.

    Parameters
    ----------
    user_config: UserConfig, default = fetch_user_config()
        Supplies the log file path.
    """
    root_logger = logging.getLogger()
    if root_logger.hasHandlers():
        return

    if user_config is None:
        user_config = fetch_user_config()

    root_logger.setLevel(logging.DEBUG)
    root_logger.addHandler(console_handler())
    root_logger.addHandler(file_handler(user_config.log_path))
    logging.captureWarnings(True)
    logging.getLogger(__name__).debug(f"Logging to {user_config.log_path}")
