import os
from functools import lru_cache
from pathlib import Path

from dotenv import load_dotenv

from fake_review_lab.errors import FakeReviewLabError

# Nine years of store operation (9 * 365 days) in seconds.
DEFAULT_STORE_LIFETIME_S = 9 * 365 * 86_400


class InvalidConfigValue(FakeReviewLabError):
    """Custom exception if an environment override cannot be parsed."""

    pass


def _positive_int_from_env(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        raise InvalidConfigValue(f"'{name}' must be an integer, got '{raw}'.")
    if value < 1:
        raise InvalidConfigValue(f"'{name}' must be a positive integer, got {value}.")
    return value


class UserConfig:
    """Object containing user configuration information."""

    def __init__(self, user_dir: Path) -> None:
        """
        Initialise object. DO NOT USE DIRECTLY, use `fetch_user_config()` instead.

        Attributes
        ----------
        user_dir : pathlib.Path, default = ``Path.home()``
            The user's home directory.
        app_dir : pathlib.Path
            The application directory where logs and scratch files are stored.
        log_path : pathlib.Path
            The path to the log file.
        config_dir : pathlib.Path
            The directory for configuration files, set to
            ``~/.config/fake-review-lab``.
        env_file : pathlib.Path
            The path to the optional environment variables file in the config_dir, set
            to ``~/.config/fake-review-lab/.env``.
        workers : int
            Worker count for parallel stages. ``FRL_WORKERS`` or the CPU count.
        tmp_dir : pathlib.Path
            Scratch directory. ``FRL_TMPDIR`` or ``app_dir/tmp``.
        store_lifetime_s : int
            Value used to fill the review frequency of single-review reviewers.
            ``FRL_STORE_LIFETIME_S`` or 283,824,000 (nine years).
        """
        self.user_dir = user_dir
        self.app_dir: Path = user_dir / "fake-review-lab"
        self.app_dir.mkdir(exist_ok=True, parents=True)
        self.log_path = self.app_dir / "logs" / "app.log"
        self.config_dir = user_dir / ".config" / "fake-review-lab"
        self.env_file: Path = self.config_dir / ".env"
        self.load_environment_variables_file()
        self.workers: int = _positive_int_from_env("FRL_WORKERS", os.cpu_count() or 1)
        tmp_dir = os.getenv("FRL_TMPDIR")
        self.tmp_dir: Path = Path(tmp_dir) if tmp_dir else self.app_dir / "tmp"
        self.store_lifetime_s: int = _positive_int_from_env(
            "FRL_STORE_LIFETIME_S", DEFAULT_STORE_LIFETIME_S
        )

    def load_environment_variables_file(self) -> None:
        """
        Load the `.env` file if there is one. A missing file is not an error.
        """
        if self.env_file.exists():
            load_dotenv(self.env_file, override=True)


@lru_cache()
def fetch_user_config(user_dir: Path = Path.home()) -> UserConfig:
    """
    Fetch the user configuration.

    Memoize to ensure a single instance of UserConfig is used throughout the
    application.

    Returns
    -------
    UserConfig
        The user configuration object.
    """
    return UserConfig(user_dir)
