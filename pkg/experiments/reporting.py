import json
import math
import os

import numpy as np
import pandas as pd

from experiments.replicas import TRAJECTORY_COLUMNS

SCHEMA_VERSION = 1


def jsonable(value):
    """Plain-Python copy of ``value`` for json.dumps; non-finite floats become null."""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def summary_document(config: dict, equilibria: list, replicas: list, aggregates: dict) -> dict:
    """The summary.json layout."""
    return {
        "schema_version": SCHEMA_VERSION,
        "config": config,
        "equilibria": equilibria,
        "replicas": replicas,
        "aggregates": aggregates,
    }


def _prepare(output_dir: str, filename: str) -> str:
    try:
        os.makedirs(output_dir, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {output_dir}: {exc.strerror or exc}") from exc
    return os.path.join(output_dir, filename)


def write_summary(document: dict, output_dir: str, filename: str = "summary.json") -> str:
    """Write the run summary as JSON; key order and float text are deterministic."""
    out_path = _prepare(output_dir, filename)
    text = json.dumps(jsonable(document), indent=2, allow_nan=False) + "\n"
    try:
        with open(out_path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {out_path}: {exc.strerror or exc}") from exc
    return out_path


def write_table(df: pd.DataFrame, output_dir: str, filename: str) -> str:
    """Write a DataFrame as CSV into the output dir and return its path."""
    out_path = _prepare(output_dir, filename)
    try:
        df.to_csv(out_path, index=False, lineterminator="\n")
    except OSError as exc:
        raise OSError(f"cannot write {out_path}: {exc.strerror or exc}") from exc
    return out_path


def trajectory_frame(rows: np.ndarray) -> pd.DataFrame:
    """Rows (k, 7) of n, S1, S2, X1l, X1r, X2l, X2r as a typed DataFrame."""
    df = pd.DataFrame(rows, columns=TRAJECTORY_COLUMNS)
    for column in ("n", "S1", "S2"):
        df[column] = df[column].astype(np.int64)
    return df


def trajectory_filename(replica_id: int) -> str:
    """trajectory_r0007.csv for replica 7."""
    return f"trajectory_r{replica_id:04d}.csv"
