"""Pure-Python chunk extraction kernel.

This is the fallback implementation of the hot inner loop: scanning cleaned
document text for keyword occurrences and emitting context windows. A
compiled twin lives in _speedups.pyx; ruletag.kernels picks one at import.

Both implementations must stay behaviorally identical; the test suite
cross-checks them against each other and against a naive reference scanner.
"""

from __future__ import annotations

from bisect import bisect_right

# Sentence-boundary punctuation: windows never cross these.
STOP_TOKENS = (".", ";", "?", "!")
_STOP_SET = frozenset(STOP_TOKENS)


def split_sentences(tokens):
    """Split a token list into sentences at stop tokens (stops excluded)."""
    sentences = []
    current = []
    for tok in tokens:
        if tok in _STOP_SET:
            if current:
                sentences.append(current)
                current = []
        else:
            current.append(tok)
    if current:
        sentences.append(current)
    return sentences


def sentence_hits(sentence, keywords):
    """Find keyword occurrences in one sentence.

    Returns a list of (token_index, keyword) pairs, one per occurrence.
    Keywords may span tokens ("not to compete") or carry surrounding
    spaces (" poach ") to force whole-word matching; matching is plain
    substring search over the space-joined, space-padded sentence.
    """
    padded = " " + " ".join(sentence) + " "
    # char offset of each token start within `padded`
    starts = []
    pos = 1
    for tok in sentence:
        starts.append(pos)
        pos += len(tok) + 1
    hits = []
    for kw in keywords:
        start = padded.find(kw)
        while start != -1:
            anchor = start
            while anchor < len(padded) and padded[anchor] == " ":
                anchor += 1
            tok_idx = bisect_right(starts, anchor) - 1
            if 0 <= tok_idx < len(sentence):
                hits.append((tok_idx, kw))
            start = padded.find(kw, start + 1)
    hits.sort(key=lambda h: (h[0], h[1]))
    return hits


def document_chunks(clean_text, keywords, n):
    """Extract all keyword context windows from one cleaned document.

    Returns a list of (chunk_text, keyword, keyword_index) triples in
    occurrence order, one per keyword hit, windows truncated at sentence
    boundaries. Duplicate chunk texts are NOT removed here; the caller
    applies per-document set semantics.
    """
    tokens = clean_text.split()
    out = []
    for sentence in split_sentences(tokens):
        for tok_idx, kw in sentence_hits(sentence, keywords):
            left = tok_idx - n
            if left < 0:
                left = 0
            right = tok_idx + n + 1
            if right > len(sentence):
                right = len(sentence)
            chunk = " ".join(sentence[left:right])
            out.append((chunk, kw, tok_idx - left))
    return out
