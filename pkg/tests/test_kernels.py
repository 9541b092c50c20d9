"""Kernel tests: pure-Python scanner semantics and compiled-twin equivalence."""

import random

import pytest
from hypothesis import given, settings, strategies as st

from ruletag import kernels
from ruletag._chunks import document_chunks, sentence_hits, split_sentences
from tests.conftest import reference_chunks

WORDS = ["the", "hire", "recruit", "staff", "employ", "solicit", "we", "a",
         "unemployment", "rehired", "x1", "payment", ".", ";", "?", "!"]


def random_text(rng, n_tokens):
    return " ".join(rng.choice(WORDS) for _ in range(n_tokens))


class TestSplitSentences:
    def test_stops_delimit_and_are_excluded(self):
        tokens = "a b . c ; d".split()
        assert split_sentences(tokens) == [["a", "b"], ["c"], ["d"]]

    def test_leading_trailing_and_repeated_stops(self):
        tokens = ". . a b ! ! c .".split()
        assert split_sentences(tokens) == [["a", "b"], ["c"]]

    def test_empty(self):
        assert split_sentences([]) == []


class TestSentenceHits:
    def test_substring_semantics(self):
        hits = sentence_hits(["unemployment", "is", "up"], ("employ",))
        assert hits == [(0, "employ")]

    def test_multi_token_keyword(self):
        hits = sentence_hits("do not to compete here".split(), ("not to compete",))
        assert hits == [(1, "not to compete")]

    def test_space_padded_keyword_forces_whole_word(self):
        sentence = "the employer may employ staff".split()
        assert sentence_hits(sentence, (" employ ",)) == [(3, " employ ")]

    def test_multiple_occurrences_and_keywords(self):
        sentence = "hire or hire and recruit".split()
        hits = sentence_hits(sentence, ("hire", "recruit"))
        assert hits == [(0, "hire"), (2, "hire"), (4, "recruit")]


class TestDocumentChunks:
    def test_window_truncated_at_sentence_stop(self):
        text = "intro words here . we shall hire staff now . tail"
        chunks = document_chunks(text, ("hire",), 6)
        assert chunks == [("we shall hire staff now", "hire", 2)]

    def test_window_bound(self):
        text = " ".join(["w"] * 30 + ["hire"] + ["v"] * 30)
        (chunk, kw, idx), = document_chunks(text, ("hire",), 6)
        assert len(chunk.split()) == 13
        assert chunk.split()[idx] == "hire"

    def test_agrees_with_reference_scanner(self):
        rng = random.Random(0)
        for _ in range(300):
            text = random_text(rng, rng.randint(0, 60))
            keywords = tuple(rng.sample(["hire", "recruit", "employ", "ire", "x1"],
                                        rng.randint(1, 4)))
            n = rng.choice([1, 3, 6, 12])
            assert document_chunks(text, keywords, n) == reference_chunks(text, keywords, n)


needs_ext = pytest.mark.skipif(
    kernels.document_chunks_c is None, reason="compiled extension not built"
)


@needs_ext
class TestCompiledTwin:
    def test_backend_reports_compiled(self):
        assert kernels.BACKEND == "compiled"

    @settings(max_examples=300, deadline=None)
    @given(
        st.lists(st.sampled_from(WORDS), max_size=60),
        st.sets(st.sampled_from(["hire", "recruit", "employ", "ire", "x1", "not to"]),
                min_size=1, max_size=4),
        st.sampled_from([1, 2, 3, 6, 12]),
    )
    def test_identical_to_pure_python(self, tokens, keywords, n):
        text = " ".join(tokens)
        kws = tuple(sorted(keywords))
        assert kernels.document_chunks_c(text, kws, n) == kernels.document_chunks_py(
            text, kws, n
        )
