"""Shared fixtures and reference oracles for the test suite."""

from __future__ import annotations

import re

import pytest

from ruletag.kernels import STOP_TOKENS

# One line per release criterion, filled in by the acceptance suite and
# echoed after the run so the report survives output capture.
ACCEPTANCE_REPORT = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_REPORT:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_REPORT:
            terminalreporter.write_line(line)


# --- independent reference scanner (oracle for chunk extraction) --------------
#
# Deliberately implemented differently from the production kernels: regex
# lookahead for overlapping substring occurrences, explicit per-character
# token map instead of binary search.


def reference_chunks(clean_text, keywords, n):
    tokens = clean_text.split()
    sentences = []
    current = []
    for tok in tokens:
        if tok in STOP_TOKENS:
            if current:
                sentences.append(current)
            current = []
        else:
            current.append(tok)
    if current:
        sentences.append(current)

    out = []
    for sentence in sentences:
        padded = " " + " ".join(sentence) + " "
        # char -> token index map
        owner = [-1] * len(padded)
        pos = 1
        for i, tok in enumerate(sentence):
            for j in range(pos, pos + len(tok)):
                owner[j] = i
            pos += len(tok) + 1
        hits = []
        for kw in keywords:
            for m in re.finditer(f"(?={re.escape(kw)})", padded):
                start = m.start()
                while start < len(padded) and padded[start] == " ":
                    start += 1
                if start < len(padded) and owner[start] >= 0:
                    hits.append((owner[start], kw))
        hits.sort()
        for idx, kw in hits:
            left = max(0, idx - n)
            right = min(len(sentence), idx + n + 1)
            out.append((" ".join(sentence[left:right]), kw, idx - left))
    return out


# --- shared rule/chunk fixture with hand-verified expected outcomes -----------

HIRING_RULE_ROWS = [
    # baseline keyword rules
    ["hire", "0", "0"],
    ["recruit", "0", "0"],
    ["employ", "0", "0"],
    ["solicit", "0", "0"],
    # phrases that indicate the clause
    ["shall not hire", "1", "1"],
    ["will not hire", "1", "1"],
    ["may not hire", "1", "1"],
    ["shall not recruit", "1", "1"],
    ["may not recruit", "1", "1"],
    ["non solicitation of employees", "1", "1"],
    # exceptions that override the phrase rules
    ["you shall not hire or permit any third party or outside vendors to access or perform any service", "2", "0"],
    ["may not hire an applicant who has a felony", "2", "0"],
    ["will not hire any person regardless of medical marijuana card", "2", "0"],
    ["shall not hire or promote anyone who may have contact with residents", "2", "0"],
    ["shall not employ felons", "2", "0"],
    ["may not solicit customers", "2", "0"],
    ["you will not hire third party or outside vendors", "2", "0"],
    # late high-priority re-affirmation
    ["not hire offer to hire or otherwise solicit any employee", "3", "1"],
]

# (chunk, expected nopoach value, expected winning rule)
HIRING_CHUNK_CASES = [
    ("shall not recruit or hire any employee or former employee offranchisor or any",
     1, "shall not recruit"),
    ("of offenders page of monitoring center staff vendors shall not employ felons in",
     0, "shall not employ felons"),
    ("in item ahove you may not solicit customers from outside your territory without",
     0, "may not solicit customers"),
    ("or our designee you will not hire third party or outside vendors to",
     0, "you will not hire third party or outside vendors"),
    ("franchise lyou may not recruit or hire any employee or former employee of",
     1, "may not recruit"),
    ("non solicitation of employees employee agrees that during",
     1, "non solicitation of employees"),
]


@pytest.fixture
def hiring_ruleset():
    from ruletag.rules import parse_rule_rows

    return parse_rule_rows(["rule", "prio", "nopoach"], HIRING_RULE_ROWS)


@pytest.fixture
def small_corpus(tmp_path):
    """A tiny corpus with metadata, keywords and rules on disk."""
    import json

    from ruletag.provenance import write_csv

    corpus = tmp_path / "corpus"
    corpus.mkdir()
    docs = {
        "a": "The franchisee shall not recruit or hire any employee of another franchise. Royalty payments are due monthly.",
        "b": "Vendors shall not employ felons in the monitoring center; training standards apply.",
        "c": "This document discusses signage and insurance only.",
        "d": "You may not solicit customers from outside your territory without approval!",
    }
    for doc_id, text in docs.items():
        (corpus / f"{doc_id}.txt").write_text(text, encoding="utf-8")
    write_csv(
        tmp_path / "metadata.csv",
        ["doc_id", "record_id", "effective_date", "firm_name"],
        [
            ["a", "r1", "2015-03-02", "Acme"],
            ["b", "r1", "2015-04-09", "Acme"],
            ["c", "r2", "2016-07-01", "Beta"],
            ["d", "r3", "2017-01-20", "Gamma"],
        ],
    )
    (tmp_path / "keywords.json").write_text(
        json.dumps({"nopoach": ["hire", "recruit", "employ", "solicit"]}),
        encoding="utf-8",
    )
    write_csv(tmp_path / "rules.csv", ["rule", "prio", "nopoach"], HIRING_RULE_ROWS)
    return tmp_path
