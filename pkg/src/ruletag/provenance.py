"""Provenance-stamped delimited-file I/O.

Every artifact the pipeline writes starts with a single comment line
`#provenance {json}` recording the tool version, input hashes, seeds and
parameters that produced it, so any artifact can be regenerated and
compared byte-for-byte. Readers skip leading comment lines, so the files
remain ordinary CSVs for spreadsheets and pandas (comment='#').
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from pathlib import Path

TOOL_VERSION = "0.1.0"


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def provenance_record(**fields) -> dict:
    rec = {"tool_version": TOOL_VERSION}
    rec.update(fields)
    return rec


def write_csv(path, header, rows, provenance: dict | None = None):
    """Write a provenance-stamped CSV. Rows are sequences."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    if provenance is not None:
        buf.write("#provenance " + json.dumps(provenance, sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(buf.getvalue())
    return path


def read_csv(path):
    """Read a (possibly provenance-stamped) CSV.

    Returns (provenance dict or None, header list, row lists).
    """
    provenance = None
    with open(path, "r", encoding="utf-8", newline="") as f:
        first = f.readline()
        if first.startswith("#provenance "):
            provenance = json.loads(first[len("#provenance "):])
        elif first.startswith("#"):
            pass
        else:
            f.seek(0)
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            return provenance, [], []
        rows = list(reader)
    return provenance, header, rows


def read_provenance(path) -> dict | None:
    with open(path, "r", encoding="utf-8") as f:
        first = f.readline()
    if first.startswith("#provenance "):
        return json.loads(first[len("#provenance "):])
    return None
