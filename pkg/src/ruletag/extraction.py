"""Keyword-in-context extraction: scan documents and emit context windows.

The hot loop (per-document scanning) lives in ruletag.kernels; this module
handles configuration, per-document dedup, metadata passthrough, file
partitioning and sampling.
"""

from __future__ import annotations

import json
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import yaml

from . import kernels
from .corpus import DEFAULT_PROFILE, CorpusManifest, MetadataTable, iter_documents
from .provenance import provenance_record, read_csv, sha256_text, write_csv

CHUNK_DELIMITER = "|"
DEFAULT_ROWS_PER_FILE = 50_000


class ExtractionError(Exception):
    pass


@dataclass(frozen=True)
class KeywordConfig:
    """tag -> keyword list, plus the window geometry."""

    tags: tuple  # ((tag, (kw, ...)), ...)
    window_size: int = 6
    window_unit: str = "words"  # "words" | "sentences"

    def __post_init__(self):
        if self.window_size < 1:
            raise ExtractionError("window_size must be >= 1")
        if self.window_unit not in ("words", "sentences"):
            raise ExtractionError(f"bad window_unit {self.window_unit!r}")
        for tag, kws in self.tags:
            if not kws:
                raise ExtractionError(f"tag {tag!r} has no keywords")
            for kw in kws:
                if not kw:
                    raise ExtractionError(f"tag {tag!r} has an empty keyword")
                if kw != kw.lower():
                    raise ExtractionError(f"keyword {kw!r} must be lowercase")

    @classmethod
    def from_mapping(cls, mapping, window_size=6, window_unit="words"):
        tags = tuple((str(t), tuple(kws)) for t, kws in mapping.items())
        return cls(tags=tags, window_size=window_size, window_unit=window_unit)

    @classmethod
    def from_file(cls, path, window_size=6, window_unit="words"):
        data = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
        if not isinstance(data, dict) or not data:
            raise ExtractionError(f"{path}: expected a mapping of tag -> keyword list")
        return cls.from_mapping(data, window_size=window_size, window_unit=window_unit)

    def tag_keywords(self, tag):
        for t, kws in self.tags:
            if t == tag:
                return kws
        raise KeyError(tag)

    @property
    def all_keywords(self):
        seen = []
        for _, kws in self.tags:
            for kw in kws:
                if kw not in seen:
                    seen.append(kw)
        return tuple(seen)

    def content_hash(self):
        payload = json.dumps(
            {"tags": [[t, list(k)] for t, k in self.tags],
             "n": self.window_size, "unit": self.window_unit},
            sort_keys=True,
        )
        return sha256_text(payload)


@dataclass(frozen=True)
class Chunk:
    doc_id: str
    text: str
    keyword: str
    keyword_index: int


def contains_keyword(text: str, keywords) -> bool:
    """Plain substring semantics: 'employ' hits 'unemployment'."""
    return any(kw in text for kw in keywords)


def get_context(sentence, keyword_hit, n, doc_id="", keyword=""):
    """Window of up to n tokens each side of the hit, within the sentence."""
    left = max(0, keyword_hit - n)
    right = min(len(sentence), keyword_hit + n + 1)
    return Chunk(
        doc_id=doc_id,
        text=" ".join(sentence[left:right]),
        keyword=keyword,
        keyword_index=keyword_hit - left,
    )


def _sentence_unit_chunks(clean_text, keywords, n):
    tokens = clean_text.split()
    sentences = kernels.split_sentences(tokens)
    out = []
    for si, sentence in enumerate(sentences):
        for tok_idx, kw in kernels.sentence_hits(sentence, keywords):
            lo = max(0, si - n)
            hi = min(len(sentences), si + n + 1)
            span = [tok for s in sentences[lo:hi] for tok in s]
            offset = sum(len(s) for s in sentences[lo:si]) + tok_idx
            out.append((" ".join(span), kw, offset))
    return out


def document_chunks(clean_text, config: KeywordConfig):
    """All keyword context windows of one document, in occurrence order."""
    keywords = config.all_keywords
    if config.window_unit == "sentences":
        triples = _sentence_unit_chunks(clean_text, keywords, config.window_size)
    else:
        triples = kernels.document_chunks(clean_text, keywords, config.window_size)
    return triples


def _dedup_keep_first(texts):
    seen = set()
    out = []
    for t in texts:
        if t not in seen:
            seen.add(t)
            out.append(t)
    return out


def _extract_one(args):
    doc_id, clean_text, tags, n, unit = args
    config = KeywordConfig(tags=tags, window_size=n, window_unit=unit)
    if not contains_keyword(clean_text, config.all_keywords):
        return doc_id, []
    chunks = [text for text, _, _ in document_chunks(clean_text, config)]
    return doc_id, _dedup_keep_first(chunks)


def extract_corpus(
    manifest: CorpusManifest,
    config: KeywordConfig,
    out_dir,
    metadata: MetadataTable | None = None,
    profile=DEFAULT_PROFILE,
    rows_per_file=DEFAULT_ROWS_PER_FILE,
    jobs=1,
):
    """Run extraction over a corpus, writing partitioned extract CSVs.

    Rows are canonicalized by doc_id sort before writing so parallel and
    serial runs produce identical files.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    work = (
        (doc.doc_id, doc.clean_text, config.tags, config.window_size, config.window_unit)
        for doc in iter_documents(manifest, profile)
    )
    results = []
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for doc_id, chunks in pool.map(_extract_one, work, chunksize=16):
                if chunks:
                    results.append((doc_id, chunks))
    else:
        for item in work:
            doc_id, chunks = _extract_one(item)
            if chunks:
                results.append((doc_id, chunks))
    results.sort(key=lambda r: r[0])

    meta_cols = []
    if metadata is not None:
        meta_cols = [c for c in metadata.columns if c != "doc_id"]
    header = ["id"] + meta_cols + ["text"]
    prov = provenance_record(
        kind="extract",
        keywords_sha256=config.content_hash(),
        n=config.window_size,
        unit=config.window_unit,
        profile_version=profile.version,
    )

    paths = []
    for part_start in range(0, len(results), rows_per_file):
        part = results[part_start:part_start + rows_per_file]
        rows = []
        for doc_id, chunks in part:
            meta_row = (metadata.get(doc_id) or {}) if metadata is not None else {}
            rows.append(
                [doc_id]
                + [meta_row.get(c, "") for c in meta_cols]
                + [CHUNK_DELIMITER.join(chunks)]
            )
        idx = part_start // rows_per_file
        prov_part = dict(prov, part=idx)
        paths.append(write_csv(out_dir / f"extract_{idx:03d}.csv", header, rows, prov_part))
    if not results:
        paths.append(write_csv(out_dir / "extract_000.csv", header, [], dict(prov, part=0)))
    return paths


def iter_extract_rows(extract_files):
    """Yield (doc_id, metadata dict, [chunk texts]) from extract CSVs."""
    for path in extract_files:
        _, header, rows = read_csv(path)
        if not header:
            continue
        meta_cols = header[1:-1]
        for row in rows:
            if len(row) != len(header):
                continue  # malformed; counted by callers that care
            doc_id, text = row[0], row[-1]
            meta = dict(zip(meta_cols, row[1:-1]))
            chunks = [c for c in text.split(CHUNK_DELIMITER) if c]
            yield doc_id, meta, chunks


def extract_provenance(extract_files):
    from .provenance import read_provenance

    for path in extract_files:
        prov = read_provenance(path)
        if prov:
            return prov
    return None


def sample_extract(extract_files, fraction, seed, out_dir):
    """Keep each extract row independently with probability `fraction`."""
    if not (0 < fraction <= 1):
        raise ExtractionError(f"fraction must be in (0, 1], got {fraction}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = random.Random(seed)
    out_paths = []
    for path in sorted(Path(p) for p in extract_files):
        prov, header, rows = read_csv(path)
        kept = [row for row in rows if rng.random() < fraction]
        prov = dict(prov or {}, kind="extract_sample", fraction=fraction, seed=seed)
        out_paths.append(write_csv(out_dir / Path(path).name, header, kept, prov))
    return out_paths
