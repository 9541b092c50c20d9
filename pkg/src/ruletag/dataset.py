"""Corpus-wide classification and the final tabular dataset.

A chunk is only sent to a model if it contains one of the tag's keywords
(the keyword gate); otherwise it is 0 by construction. Chunk predictions
OR-aggregate to documents and records, roll up into yearly prevalence
series, and persist to CSV or an embedded SQLite database.
"""

from __future__ import annotations

import sqlite3
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

from .corpus import CorpusManifest, MetadataTable
from .extraction import KeywordConfig, contains_keyword, extract_provenance, iter_extract_rows
from .learning import MetricsReport, ModelRegistry
from .provenance import provenance_record, read_csv, write_csv

# paper-style column layout for the embedded store
_META_TO_STORE = {"firm_name": "vendor", "effective_date": "effective-date"}
_STORE_TO_META = {v: k for k, v in _META_TO_STORE.items()}


class DatasetError(Exception):
    pass


def classify_chunk(chunk, tag, registry: ModelRegistry, keywords: KeywordConfig) -> int:
    """Keyword gate first: no tag keyword in the chunk means 0 without
    invoking the model."""
    if not chunk or not contains_keyword(chunk, keywords.tag_keywords(tag)):
        return 0
    model = registry.model_for(tag)
    return int(model.predict([chunk])[0])


def classify_corpus(extract_files, registry: ModelRegistry, keywords: KeywordConfig, out_path):
    """Predict every chunk for every registered tag.

    Refuses to classify extracts produced under a different keyword
    config (hash check). Returns (path, stats) where stats report model
    calls vs gate skips per tag.
    """
    prov = extract_provenance(sorted(str(p) for p in extract_files))
    if prov and prov.get("keywords_sha256") and prov["keywords_sha256"] != keywords.content_hash():
        raise DatasetError(
            "extracts were produced under a different keyword config "
            f"({prov['keywords_sha256'][:12]} != {keywords.content_hash()[:12]})"
        )
    tags = registry.tags
    entries = []  # (doc_id, chunk)
    for doc_id, _, chunks in iter_extract_rows(sorted(str(p) for p in extract_files)):
        for chunk in chunks:
            entries.append((doc_id, chunk))

    stats = {"chunks": len(entries), "per_tag": {}}
    columns = {tag: [0] * len(entries) for tag in tags}
    for tag in tags:
        kws = keywords.tag_keywords(tag)
        gated = [i for i, (_, c) in enumerate(entries) if c and contains_keyword(c, kws)]
        if gated:
            model = registry.model_for(tag)
            preds = model.predict([entries[i][1] for i in gated])
            for i, p in zip(gated, preds):
                columns[tag][i] = int(p)
        stats["per_tag"][tag] = {
            "model_calls": len(gated),
            "gate_skips": len(entries) - len(gated),
        }

    header = ["id", "chunk"] + list(tags)
    rows = [
        [doc_id, chunk] + [columns[t][i] for t in tags]
        for i, (doc_id, chunk) in enumerate(entries)
    ]
    out = write_csv(
        out_path,
        header,
        rows,
        provenance=provenance_record(kind="predictions", keywords_sha256=keywords.content_hash()),
    )
    return out, stats


def read_predictions(path):
    """-> (tags, [(doc_id, chunk, {tag: 0/1})])."""
    _, header, rows = read_csv(path)
    if header[:2] != ["id", "chunk"]:
        raise DatasetError(f"{path}: not a predictions file")
    tags = header[2:]
    out = []
    for row in rows:
        out.append((row[0], row[1], {t: int(v) for t, v in zip(tags, row[2:])}))
    return tags, out


@dataclass
class TagTable:
    level: str  # "document" | "record"
    tags: list
    meta_columns: list
    rows: dict = field(default_factory=dict)  # id -> {"meta": {}, "values": {}, "flags": []}

    def ids(self):
        return sorted(self.rows)

    def value(self, row_id, tag):
        return self.rows[row_id]["values"][tag]

    def save(self, path):
        header = ["id"] + self.meta_columns + list(self.tags)
        rows = []
        for row_id in self.ids():
            entry = self.rows[row_id]
            rows.append(
                [row_id]
                + [entry["meta"].get(c, "") for c in self.meta_columns]
                + [entry["values"][t] for t in self.tags]
            )
        prov = provenance_record(kind="tag_table", level=self.level, tags=list(self.tags))
        return write_csv(path, header, rows, provenance=prov)

    @classmethod
    def load(cls, path, level=None):
        prov, header, rows = read_csv(path)
        level = level or (prov or {}).get("level", "document")
        # tags are the trailing all-binary columns; recover from provenance if present
        tags = (prov or {}).get("tags")
        if tags is None:
            tags = []
            for col in reversed(header[1:]):
                values = {r[header.index(col)] for r in rows}
                if values <= {"0", "1"}:
                    tags.insert(0, col)
                else:
                    break
        meta_columns = [c for c in header[1:] if c not in tags]
        table = cls(level=level, tags=tags, meta_columns=meta_columns)
        for row in rows:
            d = dict(zip(header, row))
            table.rows[d["id"]] = {
                "meta": {c: d[c] for c in meta_columns},
                "values": {t: int(d[t]) for t in tags},
                "flags": [],
            }
        return table


def aggregate(predictions, metadata: MetadataTable, level, manifest: CorpusManifest | None = None):
    """OR chunk predictions up to document or record level.

    Documents without predictions (no keyword hits) get all-zero rows.
    Returns (TagTable, orphan doc_ids).
    """
    if level not in ("document", "record"):
        raise DatasetError(f"level must be document or record, got {level!r}")
    if isinstance(predictions, (str, Path)):
        tags, pred_rows = read_predictions(predictions)
    else:
        tags, pred_rows = predictions

    universe = set(metadata.rows)
    if manifest is not None:
        universe |= {doc_id for doc_id, _, _ in manifest.entries}

    doc_values = {doc_id: {t: 0 for t in tags} for doc_id in universe}
    orphans = []
    for doc_id, _, values in pred_rows:
        if doc_id not in doc_values:
            orphans.append(doc_id)
            continue
        acc = doc_values[doc_id]
        for t in tags:
            acc[t] = acc[t] | values[t]

    meta_columns = [c for c in metadata.columns if c != "doc_id"]
    table = TagTable(level=level, tags=list(tags), meta_columns=meta_columns)
    if level == "document":
        for doc_id in doc_values:
            meta = metadata.get(doc_id) or {}
            table.rows[doc_id] = {
                "meta": {c: meta.get(c, "") for c in meta_columns},
                "values": doc_values[doc_id],
                "flags": [] if doc_id in metadata else ["no_metadata"],
            }
    else:
        groups = {}
        for doc_id in doc_values:
            rec = metadata.record_id(doc_id) or doc_id
            groups.setdefault(rec, []).append(doc_id)
        for rec, doc_ids in groups.items():
            values = {t: 0 for t in tags}
            for doc_id in doc_ids:
                for t in tags:
                    values[t] |= doc_values[doc_id][t]
            meta = metadata.get(doc_ids[0]) or {}
            flags = [] if any(d in metadata for d in doc_ids) else ["no_metadata"]
            table.rows[rec] = {
                "meta": {c: meta.get(c, "") for c in meta_columns},
                "values": values,
                "flags": flags,
            }
    return table, sorted(set(orphans))


def record_metrics(tags_a: TagTable, tags_b: TagTable):
    """Per-tag confusion of tags_b (prediction) against tags_a (reference)."""
    if tags_a.level != tags_b.level:
        raise DatasetError(f"level mismatch: {tags_a.level} vs {tags_b.level}")
    if set(tags_a.rows) != set(tags_b.rows):
        diff = sorted(set(tags_a.rows) ^ set(tags_b.rows))
        raise DatasetError(f"id universe mismatch, e.g. {diff[:5]}")
    out = {}
    for tag in tags_a.tags:
        tp = fp = fn = tn = 0
        for row_id in tags_a.rows:
            ref = tags_a.value(row_id, tag)
            pred = tags_b.value(row_id, tag)
            if ref == 1 and pred == 1:
                tp += 1
            elif ref == 0 and pred == 1:
                fp += 1
            elif ref == 1 and pred == 0:
                fn += 1
            else:
                tn += 1
        out[tag] = MetricsReport(tp=tp, fp=fp, fn=fn, tn=tn)
    return out


def _parse_year(text):
    text = (text or "").strip()
    try:
        return date.fromisoformat(text).year
    except ValueError:
        pass
    if len(text) >= 4 and text[:4].isdigit():
        return int(text[:4])
    return None


def prevalence_series(tag_table: TagTable, tag, date_column="effective_date"):
    """Per-year share of rows with tag=1.

    Returns (series, excluded_count); each series entry is a dict with
    year, pct, n and a partial flag on the final year (the corpus may not
    cover it fully)."""
    if tag not in tag_table.tags:
        raise DatasetError(f"unknown tag {tag!r}")
    buckets = {}
    excluded = 0
    for row_id, entry in tag_table.rows.items():
        year = _parse_year(entry["meta"].get(date_column))
        if year is None:
            excluded += 1
            continue
        total, positive = buckets.get(year, (0, 0))
        buckets[year] = (total + 1, positive + entry["values"][tag])
    series = []
    last_year = max(buckets) if buckets else None
    for year in sorted(buckets):
        total, positive = buckets[year]
        series.append(
            {
                "year": year,
                "pct": 100.0 * positive / total,
                "n": total,
                "partial": year == last_year,
            }
        )
    return series, excluded


def save_prevalence(series, path, tag):
    prov = provenance_record(kind="prevalence", tag=tag)
    rows = [[s["year"], f"{s['pct']:.4f}", s["n"], int(s["partial"])] for s in series]
    return write_csv(path, ["year", "pct", "n", "partial"], rows, provenance=prov)


def store(tag_table: TagTable, target):
    """Persist a TagTable: .db/.sqlite targets get the embedded relational
    layout (id, vendor, effective-date, type, text, tags), anything else a
    plain CSV."""
    target = Path(target)
    if target.suffix not in (".db", ".sqlite", ".sqlite3"):
        return tag_table.save(target)

    store_cols = []
    for c in tag_table.meta_columns:
        store_cols.append(_META_TO_STORE.get(c, c))
    if target.exists():
        target.unlink()
    conn = sqlite3.connect(target)
    try:
        col_defs = ['"id" TEXT PRIMARY KEY']
        for c in store_cols:
            sqltype = "DATE" if c == "effective-date" else "TEXT"
            col_defs.append(f'"{c}" {sqltype}')
        for t in tag_table.tags:
            col_defs.append(f'"{t}" INTEGER')
        table_name = "tags_" + tag_table.level
        conn.execute(f'CREATE TABLE "{table_name}" ({", ".join(col_defs)})')
        placeholders = ", ".join(["?"] * (1 + len(store_cols) + len(tag_table.tags)))
        for row_id in tag_table.ids():
            entry = tag_table.rows[row_id]
            values = (
                [row_id]
                + [entry["meta"].get(c, "") for c in tag_table.meta_columns]
                + [entry["values"][t] for t in tag_table.tags]
            )
            conn.execute(f'INSERT INTO "{table_name}" VALUES ({placeholders})', values)
        conn.commit()
    except sqlite3.Error as exc:
        raise DatasetError(f"write failed for {target}: {exc}") from exc
    finally:
        conn.close()
    return target


def load_store(target, level):
    """Read a TagTable back from an embedded database written by store()."""
    target = Path(target)
    if target.suffix not in (".db", ".sqlite", ".sqlite3"):
        return TagTable.load(target, level=level)
    conn = sqlite3.connect(target)
    try:
        table_name = "tags_" + level
        info = conn.execute(f'PRAGMA table_info("{table_name}")').fetchall()
        columns = [c[1] for c in info]
        decltypes = {c[1]: c[2] for c in info}
        rows = conn.execute(f'SELECT * FROM "{table_name}"').fetchall()
    finally:
        conn.close()
    tags = [c for c in columns[1:] if decltypes.get(c) == "INTEGER"]
    meta_store_cols = [c for c in columns[1:] if c not in tags]
    meta_columns = [_STORE_TO_META.get(c, c) for c in meta_store_cols]
    table = TagTable(level=level, tags=list(tags), meta_columns=meta_columns)
    for row in rows:
        d = dict(zip(columns, row))
        table.rows[d["id"]] = {
            "meta": {m: d[s] for m, s in zip(meta_columns, meta_store_cols)},
            "values": {t: int(d[t]) for t in tags},
            "flags": [],
        }
    return table
