"""CSV adapters for sample sets, matrices and logistic-regression datasets."""

from __future__ import annotations

from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import numpy as np
import pandas as pd

from certified_lmc.core.errors import DomainError
from certified_lmc.models.samples import SampleMeta, SampleSet
from certified_lmc.utils.io import PathLike, ensure_directory, read_json, write_json

FLOAT_FORMAT = "%.17g"


def sidecar_path(path: PathLike) -> Path:
    """``samples.csv`` → ``samples.json``."""
    return Path(path).with_suffix(".json")


def _coordinate_columns(p: int, prefix: str = "x") -> list[str]:
    return [f"{prefix}{i + 1}" for i in range(p)]


def write_samples(samples: SampleSet, path: PathLike) -> Tuple[Path, Path]:
    """Write draws as ``x1..xp`` columns plus a JSON sidecar carrying the provenance.

    Values are printed with 17 significant digits so identical runs produce
    byte-identical files; the wall time lives only in the sidecar.
    """

    target = Path(path)
    ensure_directory(target.parent)
    frame = pd.DataFrame(samples.data, columns=_coordinate_columns(samples.dim))
    frame.to_csv(target, index=False, float_format=FLOAT_FORMAT)
    meta = write_json(samples.meta.model_dump(mode="json"), sidecar_path(target))
    return target, meta


def read_samples(path: PathLike) -> SampleSet:
    """Load a sample CSV, attaching its sidecar metadata when present.

    Parameters
    ----------
    path:
        CSV file whose header is ``x1, ..., xp``.

    Raises
    ------
    FileNotFoundError
        If the supplied ``path`` does not exist.
    DomainError
        When the header does not follow the ``x1..xp`` convention.
    """

    source = Path(path)
    if not source.exists():
        raise FileNotFoundError(f"CSV file not found: {source}")
    frame = pd.read_csv(source)
    if list(frame.columns) != _coordinate_columns(frame.shape[1]):
        raise DomainError(f"sample file {source} must have header x1..xp")

    meta_file = sidecar_path(source)
    if meta_file.exists():
        meta = SampleMeta.model_validate(read_json(meta_file))
    else:
        meta = SampleMeta(seed=0, target="unknown", n_chains=frame.shape[0], algo="unknown")
    return SampleSet(data=frame.to_numpy(dtype=float), meta=meta)


def read_matrix_csv(path: PathLike) -> np.ndarray:
    """Headerless numeric matrix, one row per line."""
    source = Path(path)
    if not source.exists():
        raise FileNotFoundError(f"CSV file not found: {source}")
    return pd.read_csv(source, header=None).to_numpy(dtype=float)


def write_matrix_csv(matrix: np.ndarray, path: PathLike) -> Path:
    target = Path(path)
    ensure_directory(target.parent)
    pd.DataFrame(np.atleast_2d(matrix)).to_csv(
        target, index=False, header=False, float_format=FLOAT_FORMAT
    )
    return target


def save_logistic_dataset(
    X: np.ndarray,
    Y: np.ndarray,
    directory: PathLike,
    config: Optional[Dict[str, Any]] = None,
) -> Path:
    """Write ``X.csv`` (x1..xp), ``Y.csv`` (y) and, when given, the generator config."""
    folder = ensure_directory(directory)
    pd.DataFrame(X, columns=_coordinate_columns(X.shape[1])).to_csv(
        folder / "X.csv", index=False, float_format=FLOAT_FORMAT
    )
    pd.DataFrame({"y": np.asarray(Y, dtype=int)}).to_csv(folder / "Y.csv", index=False)
    if config is not None:
        write_json(config, folder / "dataset.json")
    return folder


def load_logistic_dataset(directory: PathLike) -> Tuple[np.ndarray, np.ndarray]:
    folder = Path(directory)
    x_file, y_file = folder / "X.csv", folder / "Y.csv"
    for required in (x_file, y_file):
        if not required.exists():
            raise FileNotFoundError(f"CSV file not found: {required}")
    X = pd.read_csv(x_file).to_numpy(dtype=float)
    Y = pd.read_csv(y_file).iloc[:, 0].to_numpy(dtype=float)
    if X.shape[0] != Y.shape[0]:
        raise DomainError(f"X has {X.shape[0]} rows but Y has {Y.shape[0]} labels")
    return X, Y
