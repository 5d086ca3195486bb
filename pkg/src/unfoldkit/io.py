"""CSV and JSON artifact helpers shared by the CLI and the demo scripts.

All CSV files carry a header row, UTF-8, '.' decimal, one point per row.
JSON reports are emitted with stable key order so runs diff cleanly.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .data import Dataset

REPORT_VERSION = 1


def write_points_csv(path, data: Dataset) -> None:
    """Header x0..x{d-1}[,label]; one point per row."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        header = [f"x{i}" for i in range(data.dim)]
        if data.labels is not None:
            header.append("label")
        w.writerow(header)
        for j in range(data.n):
            row = [repr(float(v)) for v in data.points[:, j]]
            if data.labels is not None:
                row.append(str(data.labels[j]))
            w.writerow(row)


def read_points_csv(path) -> Dataset:
    """Inverse of write_points_csv; a trailing 'label' column is optional."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError(f"{path}: empty file")
        has_labels = header and header[-1] == "label"
        d = len(header) - (1 if has_labels else 0)
        cols, labels = [], []
        for row in reader:
            if not row:
                continue
            if len(row) != len(header):
                raise ValueError(f"{path}: row width {len(row)} != header width")
            cols.append([float(v) for v in row[:d]])
            if has_labels:
                labels.append(row[d])
    if not cols:
        raise ValueError(f"{path}: no data rows")
    return Dataset(points=np.array(cols).T,
                   labels=tuple(labels) if has_labels else None)


def write_matrix_csv(path, M: np.ndarray, prefix: str = "c") -> None:
    M = np.asarray(M, dtype=float)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow([f"{prefix}{i}" for i in range(M.shape[1])])
        for row in M:
            w.writerow([repr(float(v)) for v in row])


def read_matrix_csv(path) -> np.ndarray:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        next(reader, None)
        rows = [[float(v) for v in row] for row in reader if row]
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return np.array(rows)


def write_embedding_csv(path, coordinates: np.ndarray) -> None:
    """Embedding coordinates (p, n) written one point per row, header y0..."""
    write_matrix_csv(path, np.asarray(coordinates, dtype=float).T, prefix="y")


def read_actions_csv(path) -> tuple:
    """One action identifier per line (header 'action' tolerated)."""
    with open(path, newline="", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if lines and lines[0] == "action":
        lines = lines[1:]
    if not lines:
        raise ValueError(f"{path}: no actions")
    return tuple(lines)


def write_report(path, payload: dict, config: dict | None = None) -> None:
    """JSON report with the tool version and the full resolved config."""
    from . import __version__
    body = {"version": __version__, "report_version": REPORT_VERSION,
            "config": _jsonable(config or {}), **_jsonable(payload)}
    Path(path).write_text(json.dumps(body, sort_keys=True, indent=2) + "\n",
                          encoding="utf-8")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def read_config_file(path) -> dict:
    """key = value lines; '#' comments; values stay strings for argparse."""
    cfg = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}: bad config line {raw!r}")
        key, value = line.split("=", 1)
        cfg[key.strip()] = value.strip()
    return cfg
