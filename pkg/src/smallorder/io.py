"""Atomic CSV/JSON writers for matrices, solutions, tables and manifests.

Layouts are documented in FORMATS.md.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

SCHEMA_VERSION = "1"


def atomic_write_text(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if x is None:
        return ""
    return str(x)


def write_csv(path, header, rows) -> Path:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return atomic_write_text(path, buf.getvalue())


def write_matrix_csv(path, K) -> Path:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "kind", "s"])
    w.writerow([K.n, K.kind, _fmt(K.s)])
    for row in K.entries:
        w.writerow([repr(float(v)) for v in row])
    return atomic_write_text(path, buf.getvalue())


def read_matrix_csv(path):
    """Inverse of :func:`write_matrix_csv`; returns ``(n, kind, s, entries)``."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    n, kind, s = rows[1]
    entries = np.array([[float(v) for v in r] for r in rows[2:]])
    return int(n), kind, (float(s) if s else None), entries


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, Path):
        return str(obj)
    return obj


def write_json(path, payload) -> Path:
    text = json.dumps(_jsonable(payload), indent=2, sort_keys=False) + "\n"
    return atomic_write_text(path, text)
