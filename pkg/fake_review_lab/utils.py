import hashlib
import json
import logging
import platform
import time
from collections.abc import Iterable
from pathlib import Path
from typing import Any, Optional

import numpy as np
import pandas as pd
import scipy

from fake_review_lab import __version__

logger = logging.getLogger(__name__)


class FileHandler:
    """Handle file I/O."""

    @staticmethod
    def write_json(data: dict[Any, Any] | list[Any], file_path: Path | str) -> None:
        """Static method to write json. Logs the file path to info."""
        with open(file_path, "w", encoding="utf-8", newline="\n") as file_handle:
            json.dump(data, file_handle, indent=2, sort_keys=True)
            file_handle.write("\n")
        logger.info(f"Written to: '{file_path}'")

    @staticmethod
    def read_json(file_path: Path | str) -> Any:
        """Static method to read json."""
        with open(file_path, "r", encoding="utf-8") as file_handle:
            content = json.load(file_handle)
        return content

    @staticmethod
    def write_csv(frame: pd.DataFrame, file_path: Path | str) -> None:
        """Comma separated, header row, '.' decimals, UTF-8, no index."""
        frame.to_csv(file_path, index=False, lineterminator="\n", encoding="utf-8")
        logger.info(f"Written to: '{file_path}'")


def sha256_file(path: Path | str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as file_handle:
        for block in iter(lambda: file_handle.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def derive_seed(*keys: int) -> int:
    """
    Derive an independent 32-bit seed from a root seed and a path of integer keys,
    e.g. ``derive_seed(seed, repeat, fold, tree)``.
    """
    return int(np.random.SeedSequence(list(keys)).generate_state(1)[0])


def derive_rng(*keys: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(list(keys)))


def new_root_seed() -> int:
    """A fresh seed for runs invoked without ``--seed``."""
    return int(np.random.SeedSequence().generate_state(1)[0])


def manifest_path(artifact: Path | str) -> Path:
    artifact = Path(artifact)
    return artifact.with_name(artifact.name + ".manifest.json")


def write_manifest(
    artifact: Path | str,
    subcommand: str,
    inputs: Iterable[Path | str],
    parameters: dict[str, Any],
    seed: Optional[int],
    started: float,
) -> Path:
    """
    Write ``<artifact>.manifest.json`` describing how the artifact was produced.

    Parameters
    ----------
    artifact: Path | str
        The output file.
    subcommand: str
    inputs: Iterable[Path | str]
        Input files, recorded with their SHA-256 digests.
    parameters: dict[str, Any]
        JSON-serialisable run parameters.
    seed: int | None
    started: float
        ``time.perf_counter()`` at the start of the run.

    Returns
    -------
    Path
        The manifest path.
    """
    manifest = {
        "subcommand": subcommand,
        "artifact": Path(artifact).name,
        "inputs": [
            {"path": str(path), "sha256": sha256_file(path)} for path in inputs
        ],
        "parameters": parameters,
        "seed": seed,
        "versions": {
            "fake_review_lab": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "pandas": pd.__version__,
        },
        "wall_time_s": round(time.perf_counter() - started, 3),
    }
    path = manifest_path(artifact)
    FileHandler.write_json(manifest, path)
    return path
