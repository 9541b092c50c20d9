# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled chunk extraction kernel (behavioral twin of _chunks.py)."""

STOP_TOKENS = (".", ";", "?", "!")
cdef frozenset _STOP_SET = frozenset(STOP_TOKENS)


def split_sentences(list tokens):
    cdef list sentences = []
    cdef list current = []
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


def sentence_hits(list sentence, keywords):
    cdef str padded = " " + " ".join(sentence) + " "
    cdef Py_ssize_t pos = 1
    cdef Py_ssize_t i, start, anchor, lo, hi, mid, npad
    cdef list starts = []
    for tok in sentence:
        starts.append(pos)
        pos += len(<str>tok) + 1
    npad = len(padded)
    cdef list hits = []
    cdef str kw
    for kw in keywords:
        start = padded.find(kw)
        while start != -1:
            anchor = start
            while anchor < npad and padded[anchor] == " ":
                anchor += 1
            # rightmost token start <= anchor
            lo, hi = 0, len(starts)
            while lo < hi:
                mid = (lo + hi) // 2
                if starts[mid] <= anchor:
                    lo = mid + 1
                else:
                    hi = mid
            i = lo - 1
            if 0 <= i < len(sentence):
                hits.append((i, kw))
            start = padded.find(kw, start + 1)
    hits.sort()
    return hits


def document_chunks(str clean_text, keywords, Py_ssize_t n):
    cdef list tokens = clean_text.split()
    cdef list out = []
    cdef list sentence
    cdef Py_ssize_t tok_idx, left, right, slen
    for sentence in split_sentences(tokens):
        slen = len(sentence)
        for tok_idx, kw in sentence_hits(sentence, keywords):
            left = tok_idx - n
            if left < 0:
                left = 0
            right = tok_idx + n + 1
            if right > slen:
                right = slen
            out.append((" ".join(sentence[left:right]), kw, tok_idx - left))
    return out
