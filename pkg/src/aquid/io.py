"""CSV tables and JSON manifests with byte-stable formatting."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from . import __version__


def _cell(v) -> str:
    if isinstance(v, (str, np.str_)):
        return str(v)
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v) + 0.0  # no "-0" cells
    if np.isnan(v):
        return "nan"
    return format(v, ".12g")


def write_csv(path: str | Path, table: dict[str, np.ndarray]) -> None:
    names = list(table)
    columns = [np.asarray(table[n]) for n in names]
    rows = {len(c) for c in columns}
    if len(rows) > 1:
        raise ValueError(f"ragged table: column lengths {sorted(rows)}")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(names)
        for i in range(rows.pop() if rows else 0):
            writer.writerow([_cell(c[i]) for c in columns])


def read_csv(path: str | Path) -> dict[str, list[str]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        cols = {h: [] for h in header}
        for row in reader:
            for h, v in zip(header, row):
                cols[h].append(v)
    return cols


def write_manifest(path: str | Path, command: str, config: dict, outputs: list[str],
                   extra: dict | None = None) -> None:
    """JSON record sufficient to rerun ``command`` and get identical outputs."""
    doc = {
        "package": "aquid",
        "version": __version__,
        "command": command,
        "config": config,
        "outputs": sorted(outputs),
    }
    if extra:
        doc.update(extra)
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True, default=_jsonable) + "\n")


def _jsonable(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")
