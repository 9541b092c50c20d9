"""N-gram exploration over extract files.

Counts one centered token slice per chunk (phrase counting, not per-token),
either around the chunk midpoint or around the first keyword hit. Midpoint
centering uses floor division and the slice
tokens[max(0, L//2 - n) : min(L, L//2 + n)].
"""

from __future__ import annotations

from collections import Counter

from .extraction import iter_extract_rows
from .kernels import sentence_hits
from .provenance import provenance_record, write_csv


class NgramError(Exception):
    pass


def _midpoint_slice(tokens, n):
    mid = len(tokens) // 2
    return tokens[max(0, mid - n): min(len(tokens), mid + n)]


def _keyword_slice(tokens, n, keywords):
    hits = sentence_hits(tokens, keywords)
    if not hits:
        return _midpoint_slice(tokens, n)
    idx = hits[0][0]
    return tokens[max(0, idx - n): min(len(tokens), idx + n + 1)]


def ngram_explore(extract_files, n, center="keyword", keywords=None):
    """Count centered n-gram phrases across all chunks.

    Returns [(ngram, count)] sorted by count descending, then ngram, so
    the report is identical across runs and worker counts. The counts sum
    to the number of chunks scanned.
    """
    if n < 1:
        raise NgramError("n must be >= 1")
    if center not in ("keyword", "midpoint"):
        raise NgramError(f"bad center mode {center!r}")
    if center == "keyword" and not keywords:
        center = "midpoint"

    counts = Counter()
    for _, _, chunks in iter_extract_rows(extract_files):
        for chunk in chunks:
            tokens = chunk.split()
            if not tokens:
                continue
            if center == "keyword":
                phrase = _keyword_slice(tokens, n, keywords)
            else:
                phrase = _midpoint_slice(tokens, n)
            if phrase:
                counts[" ".join(phrase)] += 1
    return sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))


def write_report(report, path, n, center):
    prov = provenance_record(kind="ngram_report", n=n, center=center)
    return write_csv(path, ["ngram", "count"], report, provenance=prov)
