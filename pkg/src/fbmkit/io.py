"""Path files: CSV with a ``t`` column or raw little-endian float64, plus a JSON sidecar."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

RAW_DTYPE = "<f8"


def format_float(x: float) -> str:
    # 17 significant digits round-trip any double
    return repr(float(x)) if np.isfinite(x) else str(x)


def sidecar_path(path) -> Path:
    return Path(str(path) + ".json")


def write_table(path, times, columns, fmt: str = "csv", names=None) -> list:
    """Write ``times`` and the rows of ``columns`` (shape (count, rows)) as one table."""
    columns = np.atleast_2d(np.asarray(columns, dtype=float))
    names = names or [f"path_{i}" for i in range(columns.shape[0])]
    header = ["t", *names]
    table = np.column_stack([np.asarray(times, dtype=float), columns.T])
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            write_csv(fh, header, table)
    elif fmt == "raw":
        table.astype(RAW_DTYPE).tofile(path)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return header


def write_csv(fh, header, table) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    for row in table:
        w.writerow([format_float(v) for v in row])


def write_sidecar(path, meta: dict) -> Path:
    side = sidecar_path(path)
    side.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return side


def read_sidecar(path) -> dict:
    side = sidecar_path(path)
    return json.loads(side.read_text()) if side.exists() else {}


def _looks_numeric(cells) -> bool:
    try:
        [float(c) for c in cells]
    except ValueError:
        return False
    return True


def read_table(path, fmt: str = None):
    """Return ``(header, table)`` with ``table`` of shape (rows, columns)."""
    path = Path(path)
    meta = read_sidecar(path)
    fmt = fmt or meta.get("format") or ("raw" if path.suffix in (".bin", ".raw", ".f64") else "csv")
    if fmt == "raw":
        header = meta.get("columns")
        if not header:
            raise ValueError(f"raw file {path} needs a sidecar listing its columns")
        flat = np.fromfile(path, dtype=RAW_DTYPE)
        if flat.size % len(header):
            raise ValueError(f"raw file {path} size does not match {len(header)} columns")
        return list(header), flat.reshape(-1, len(header)).astype(float)
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if not rows:
        raise ValueError(f"{path} is empty")
    if _looks_numeric(rows[0]):
        header = [f"col_{i}" for i in range(len(rows[0]))]
    else:
        header, rows = rows[0], rows[1:]
    try:
        table = np.array([[float(c) for c in r] for r in rows], dtype=float)
    except ValueError as exc:
        raise ValueError(f"{path}: non-numeric data ({exc})") from None
    if table.ndim != 2 or table.shape[1] != len(header):
        raise ValueError(f"{path}: ragged rows")
    return header, table


def read_series(path, fmt: str = None) -> dict:
    """Every non-``t`` column of a path file, keyed by column name."""
    header, table = read_table(path, fmt)
    return {name: table[:, i] for i, name in enumerate(header) if name != "t"}
