"""Deterministic CSV/JSON emission and config digests.

Numbers in CSV files are serialized with 17 significant digits so every
emitted file is re-parseable by ``read_csv`` with zero loss, and identical
runs produce byte-identical artifacts.  JSON files keep insertion key order.
"""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path


def fmt_float(x) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def write_csv(path, meta: dict, columns, rows) -> None:
    """CSV with '#'-prefixed header metadata lines, then a column header row."""
    path = Path(path)
    lines = [f"# {key} = {value}" for key, value in meta.items()]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(fmt_float(v) if isinstance(v, (int, float)) else str(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_csv(path):
    """Parse a file written by ``write_csv``: returns (meta, columns, rows)."""
    meta = {}
    columns = None
    rows = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        if line.startswith("#"):
            key, _, value = line[1:].partition("=")
            meta[key.strip()] = value.strip()
            continue
        if columns is None:
            columns = line.split(",")
            continue
        rows.append([float(v) for v in line.split(",")])
    return meta, columns or [], rows


def write_json(path, obj) -> None:
    Path(path).write_text(
        json.dumps(obj, indent=2, allow_nan=True) + "\n", encoding="utf-8"
    )


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=True)


def config_digest(config: dict) -> str:
    """Stable hash of a normalized configuration mapping (key order irrelevant)."""
    return hashlib.sha256(canonical_json(config).encode("utf-8")).hexdigest()[:16]


def sha256_file(path) -> str:
    h = hashlib.sha256()
    h.update(Path(path).read_bytes())
    return h.hexdigest()
