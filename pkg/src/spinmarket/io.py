"""CSV/JSON writers and readers shared by the command-line stages.

Every CSV is comma-separated with a header row, LF line endings, `.` decimal
point and 17-significant-digit floats, so files round-trip bit-exactly.
Writers stage output into a `<name>.partial` file and rename on success; an
interrupted run leaves the `.partial` marker behind instead of a truncated
data file.
"""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np


def fmt(x: float) -> str:
    """Decimal rendering with 17 significant digits (round-trip exact for f64)."""
    return format(float(x), ".17g")


def _cell(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (float, np.floating)):
        return fmt(value)
    return str(value)


def write_rows_atomic(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    """Write a CSV to `path` via a `.partial` staging file.

    On any exception the `.partial` file is left in place as the
    interrupted-run marker and the final file is not touched.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    partial = Path(str(path) + ".partial")
    with open(partial, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_cell(c) for c in row) + "\n")
    os.replace(partial, path)
    return path


def write_json_atomic(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    partial = Path(str(path) + ".partial")
    with open(partial, "w", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(partial, path)
    return path


def write_flat_text(path, mapping: Mapping[str, object]) -> Path:
    """Flat `key = value` summary file (one entry per line, sorted keys)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    partial = Path(str(path) + ".partial")
    with open(partial, "w", newline="\n") as fh:
        for key in sorted(mapping):
            fh.write(f"{key} = {_cell(mapping[key])}\n")
    os.replace(partial, path)
    return path


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    """Small-file CSV reader returning (header, raw string rows)."""
    with open(path, newline="\n") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    header = lines[0].split(",")
    return header, [ln.split(",") for ln in lines[1:]]


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


# -- return panel -------------------------------------------------------------

def write_panel_csv(path, panel) -> Path:
    """Panel CSV: header `t,a0,a1,...`, one row per time step, t starting at 1."""
    values = panel.values
    n = values.shape[0]
    header = ["t"] + [f"a{k}" for k in range(n)]
    rows = ((t + 1, *col) for t, col in enumerate(values.T))
    return write_rows_atomic(path, header, rows)


def read_panel_csv(path):
    from .series import ReturnPanel

    with open(path) as fh:
        fh.readline()
        if not fh.readline():
            raise ValueError(f"empty panel file: {path}")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return ReturnPanel(np.ascontiguousarray(data[:, 1:].T))


# -- dense matrices -----------------------------------------------------------

def write_matrix_csv(path, entries: np.ndarray, prefix: str = "c") -> Path:
    entries = np.asarray(entries, dtype=float)
    header = [f"{prefix}{k}" for k in range(entries.shape[1])]
    return write_rows_atomic(path, header, (tuple(row) for row in entries))


def read_matrix_csv(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
